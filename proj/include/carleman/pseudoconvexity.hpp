#pragma once

#include "carleman/fields.hpp"
#include "carleman/types.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace carleman {

// Pointwise data shared by the quadratic-form evaluations: the symmetrized
// matrix of q(x,.), the weight gradient in both pictures, and the g-unit
// normal N_g = grad_g phi / |grad_g phi|.
struct QPointData {
  Mat g, g_inv;
  Mat q_matrix;      // q(x,theta) = theta' q_matrix theta
  Vec grad_phi;      // Euclidean gradient
  Vec grad_g_phi;    // g^{-1} grad phi
  double norm_g_phi = 0.0;  // |grad_g phi| in the g-norm
  Vec normal;        // N_g
  double log_weight_scale = 0.0;  // log of a removed common factor (exp(mu psi) path)
};

QPointData q_point_data(const MetricField& metric, const WeightFunction& phi, const Point& x);

// N_g; throws ZeroGradient when grad phi vanishes at x.
Vec normal_direction(const MetricField& metric, const WeightFunction& phi, const Point& x);

// Quadratic form q(x, theta): weight Hessian plus metric-derivative terms.
double q_form(const MetricField& metric, const WeightFunction& phi, const Point& x,
              const Vec& theta);

// Full form Q(x, xi, tau): evaluated literally, term by term, so it can be
// cross-checked against the decomposition q(xi_g) + tau^2 |grad_g phi|^2 q(N).
double Q_form(const MetricField& metric, const WeightFunction& phi, const Point& x, const Vec& xi,
              double tau);

// Conjugated principal symbol P(x, xi + i tau grad phi).
std::complex<double> symbol(const MetricField& metric, const WeightFunction& phi, const Point& x,
                            const Vec& xi, double tau);

struct TangentMin {
  double min_value = 0.0;
  Vec argmin;  // g-unit, g-orthogonal to N_g
};

// Exact minimization of q over the g-unit tangent sphere at x: Gram-Schmidt in
// the g inner product, then an (n-1)x(n-1) symmetric eigenproblem.
TangentMin tangent_min(const MetricField& metric, const WeightFunction& phi, const Point& x);

struct PseudoconvexityCertificate {
  double c0 = 0.0;
  double c0_log = std::numeric_limits<double>::quiet_NaN();  // log c0 when c0 > 0
  Point argmin_point;
  Vec argmin_tangent;
  int n_samples = 0;
  int tangent_resolution = 0;  // 0 = exact eigensolve (no tangent sampling)
  double margin = 0.0;
  bool pass = false;
  bool zero_gradient_hit = false;
  Point zero_gradient_at;
  std::string metric_name, weight_name;
  std::vector<Point> samples;  // kept for downstream cross-checks
};

// c0 = min over samples of (tangent_min + q(N_g)) / 2; passes iff c0 > margin.
PseudoconvexityCertificate certify(const MetricField& metric, const WeightFunction& phi,
                                   const std::vector<Point>& domain_samples, double margin = 0.0);

// Scale-robust variant for recipe weights phi = exp(mu psi): q is homogeneous
// of degree one in the weight scale, so the exp(mu psi) factor is pulled out
// analytically and c0 is reconstructed in log space. Large mu (where the
// pointwise weight would underflow) certifies exactly like the plain path.
PseudoconvexityCertificate certify_recipe(const MetricField& metric, const WeightRecipe& recipe,
                                          const std::vector<Point>& domain_samples,
                                          double margin = 0.0);

struct CrossCheckReport {
  int n_draws = 0;
  int violations = 0;
  double min_slack = 0.0;  // min of Q - c0 (|xi_g|^2 + tau^2 |grad_g phi|^2)
};

// Samples the characteristic set |xi_g| = |tau| |grad_g phi|, <xi_g, N_g> = 0
// and asserts the certified lower bound with slack tolerance 1e-9.
CrossCheckReport characteristic_cross_check(const MetricField& metric, const WeightFunction& phi,
                                            const PseudoconvexityCertificate& cert, int n_random,
                                            std::uint64_t seed);

struct MuSearchResult {
  double mu_min = 0.0;
  PseudoconvexityCertificate certificate;
  std::vector<std::pair<double, double>> trace;  // (mu, c0) probes
};

// Smallest mu with a passing certificate for phi = exp(mu psi): doubling from
// mu = 1 up to mu_max, then 30 bisection steps.
MuSearchResult mu_search(const MetricField& metric, const WeightRecipe& recipe_without_mu,
                         const std::vector<Point>& domain_samples, double mu_max);

struct AlphaSelection {
  double alpha_tilde = 0.0;  // (3 c0 / 8 - q(N)) / 2
  double gamma = 0.0;        // alpha_tilde - laplace_g phi
  double q_N = 0.0;
  bool window_ok = false;    // -q(N)/2 < alpha < (c0 - q(N))/2
  bool band_ok = false;      // c0/4 <= q(N) + 2 alpha <= c0/2
};

AlphaSelection alpha_select(const PseudoconvexityCertificate& cert, const MetricField& metric,
                            const WeightFunction& phi, const Point& x);

// Lipschitz seminorm of alpha_tilde over consecutive sample pairs.
double alpha_lipschitz(const PseudoconvexityCertificate& cert, const MetricField& metric,
                       const WeightFunction& phi, const std::vector<Point>& samples);

// sup over samples of the g-dual norm of q_matrix * N_g (the X-Y coupling).
double coupling_C1(const MetricField& metric, const WeightFunction& phi,
                   const std::vector<Point>& samples);

struct MinorReport {
  Mat M_matrix;            // 3x3 per the proof's quadratic form in (X, Y, Z)
  Vec minors;              // leading principal minors
  double C1_emp = 0.0;
  double detM_lower = 0.0;  // c0^2 m^2 / (2 lambda)
  double tau1_emp = 0.0;    // smallest grid tau with det M >= detM_lower at all samples
  bool positive_definite = false;
};

MinorReport minor_report(const PseudoconvexityCertificate& cert, const MetricField& metric,
                         const WeightFunction& phi, const Point& x, double tau, double C1,
                         double m_bound, const std::vector<Point>& samples = {});

struct ProofDiagnostics {
  double X = 0.0;  // |<grad_g v, N_g>|
  double Y = 0.0;  // |T_g|
  double Z = 0.0;  // tau |grad_g phi| v
  Vec T_g;
};

ProofDiagnostics tangential_split(const MetricField& metric, const WeightFunction& phi,
                                  const Point& x, const Vec& grad_v, double tau, double v_val);

}  // namespace carleman
