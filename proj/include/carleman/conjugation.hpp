#pragma once

#include "carleman/fields.hpp"
#include "carleman/grid.hpp"
#include "carleman/types.hpp"

#include <string>
#include <vector>

namespace carleman {

// exp() argument guard for the weighted integrals; exponentials are always
// computed in the shifted form exp(tau (phi - max phi)).
inline constexpr double kExpGuard = 650.0;

struct ConjugatedApplication {
  double tau = 0.0;
  ScalarField direct;    // exp(tau phi) Lap_g(exp(-tau phi) v), computed literally
  ScalarField expanded;  // S_part + A_part (same floating-point summands)
  ScalarField S_part;    // Lap_g v + tau^2 |grad_g phi|^2 v
  ScalarField A_part;    // -2 tau <grad_g phi, grad_g v> - tau (Lap_g phi) v
};

ConjugatedApplication conjugate(const MetricField& metric, const WeightFunction& phi,
                                const ScalarField& v, double tau);

// Analytic vector field with Jacobian, for the Rellich identity check.
struct VectorFieldB {
  std::function<Vec(const Point&)> eval;
  std::function<Mat(const Point&)> jacobian;  // (i, k) = d B_k / d x_i
  std::string name = "B";
};

// Integrates both sides of the divergence identity for 2 <B, grad_g f> Lap_g f
// over the mask (the divergence term drops for compactly supported f).
// abs_mass is the integral of the summed |integrand| magnitudes; residuals at
// or below roundoff of that mass are already converged.
struct RellichResult {
  double residual = 0.0;  // |LHS - RHS|
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_mass = 0.0;
};

RellichResult rellich_residual(const MetricField& metric, const VectorFieldB& B,
                               const ScalarField& f);

// LHS / RHS of the weighted inequality at one tau:
//   tau * int (|grad_g u|^2 + tau^2 u^2) e^{2 tau phi}  /  int |Lap_g u|^2 e^{2 tau phi}
double carleman_ratio(const MetricField& metric, const WeightFunction& phi, const ScalarField& u,
                      double tau);

struct TauSweepReport {
  std::vector<double> tau_grid;
  std::vector<std::string> test_function_ids;
  // indexed [function][tau]
  std::vector<std::vector<double>> lhs, rhs, ratios;
  double K_emp = 0.0;
  double tau0_emp = 0.0;
  double trusted_tau_max = 0.0;  // tau * h <= rule bound
};

// Geometric tau grid; tau0_emp is the first grid point past which the max
// ratio grows by < 5% per doubling; K_emp is the max ratio at tau >= tau0_emp.
TauSweepReport tau_sweep(const MetricField& metric, const WeightFunction& phi,
                         const std::vector<ScalarField>& test_functions, double tau_min,
                         double tau_max, int n_tau, double tau_h_rule = 1.0);

}  // namespace carleman
