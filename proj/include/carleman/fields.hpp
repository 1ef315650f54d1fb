#pragma once

#include "carleman/expression.hpp"
#include "carleman/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace carleman {

// Symmetric coefficient matrix field g(x) with declared ellipticity and
// Lipschitz bounds. grad_eval returns the n matrices d g / d x_s; when absent,
// derivatives fall back to central differences with step kMetricFdStep.
struct MetricField {
  int dim = 0;
  std::function<Mat(const Point&)> eval;
  std::function<std::vector<Mat>(const Point&)> grad_eval;  // may be empty
  double lambda_bound = 1.0;  // eigenvalues of g in [1/lambda, lambda]
  double Lambda_bound = 0.0;  // sum_ij |g_ij(x)-g_ij(y)| <= Lambda |x-y|
  std::string name = "custom";
};

inline constexpr double kMetricFdStep = 1e-5;

// Scalar weight phi with analytic gradient and Hessian.
struct WeightFunction {
  int dim = 0;
  std::function<double(const Point&)> eval;
  std::function<Vec(const Point&)> grad;
  std::function<Mat(const Point&)> hess;
  double m_bound = 0.0;  // min |grad phi| over the working set
  double M_bound = 0.0;  // C^2 norm over the working set
  std::string name = "custom";
};

// Ingredients for phi = exp(mu * psi).
struct WeightRecipe {
  int dim = 0;
  std::function<double(const Point&)> psi;
  std::function<Vec(const Point&)> psi_grad;
  std::function<Mat(const Point&)> psi_hess;
  double mu = 0.0;
  double m0_bound = 0.0;  // min |grad_g psi| (g-norm)
  double M0_bound = 0.0;  // C^2 norm of psi
  std::string name = "custom";
};

struct MetricEval {
  Mat g;
  Mat g_inv;
  std::vector<Mat> dg;      // dg[s](i,j) = d g_ij / d x_s
  std::vector<Mat> dg_inv;  // from dg via  d g^{ik} = -g^{ij} (d g_jh) g^{hk}
};

struct EllipticityReport {
  double lambda_emp = 0.0;
  double Lambda_emp = 0.0;
  double min_grad_phi = std::numeric_limits<double>::quiet_NaN();
  std::vector<Point> worst_points;  // [0] lambda witness, [1] Lambda pair lhs, [2] m witness
  bool pass_lambda = false;
  bool pass_Lambda = false;
  bool pass_m = false;
  int n_samples = 0;
};

struct WeightBounds {
  double m_emp = 0.0;
  double M_emp = 0.0;
  bool zero_gradient = false;  // m_emp == 0 is flagged, not thrown
  Point worst_point;
};

// Evaluates g, its inverse, and coefficient derivatives at x.
// Throws DegenerateMetric when g(x) is not SPD and InvalidInput for a
// non-symmetric or non-finite evaluation.
MetricEval metric_eval(const MetricField& metric, const Point& x);

// Empirical ellipticity / Lipschitz certificate on a sample set.
EllipticityReport validate_bounds(const MetricField& metric, const std::vector<Point>& samples,
                                  const std::vector<std::pair<Point, Point>>& pairs);

// grad_g f = g^{-1} grad f.
Vec g_gradient(const MetricField& metric, const Point& x, const Vec& euclid_grad);

// phi = exp(mu psi) with the chain-rule gradient and Hessian. When samples are
// provided, m/M bounds are filled in and |grad psi| = 0 raises ZeroGradient.
WeightFunction exp_weight(const WeightRecipe& recipe, const std::vector<Point>& samples = {});

// min |grad phi| and the sampled C^2 norm (max over |phi|, |d phi|, |d2 phi|).
WeightBounds weight_bounds(const WeightFunction& phi, const std::vector<Point>& samples);

// div(g^{-1} grad phi) evaluated analytically from metric derivatives.
double laplace_g_weight(const MetricField& metric, const WeightFunction& phi, const Point& x);

// --- built-in catalog -------------------------------------------------------
// Metrics: "identity", "diag:a,b[,c]", "sin-perturbed:eps", "diag-expr:e1;e2[;e3]"
MetricField make_metric(const std::string& spec, int dim);
// Recipes (psi part; mu filled by caller): "neg-abs2", "linear:d1,d2[,d3]", "expr:..."
WeightRecipe make_recipe(const std::string& spec, int dim, double mu);
// Weights: "expr:..." or via recipe "exp:<recipe-spec>" with mu pre-set
WeightFunction make_weight(const std::string& spec, int dim);

WeightFunction weight_from_expression(const Expression& e, const std::string& name = "expr");

}  // namespace carleman
