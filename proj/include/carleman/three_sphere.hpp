#pragma once

#include "carleman/fields.hpp"
#include "carleman/grid.hpp"
#include "carleman/types.hpp"

#include <string>
#include <vector>

namespace carleman {

// L^2 norm of u over the ball of radius r (masked quadrature).
double ball_norm(const ScalarField& u, double r);

// Interpolation exponent from the decreasing radial profile e^{-mu0 t^2}:
//   theta = (p(rho) - p(1/2)) / (p(r0/4) - p(1/2)),  p(t) = exp(-mu0 t^2).
// The proof covers r0/2 < rho < 1/2 only; outside that range this refuses.
double theta_exponent(double r0, double rho, double mu0);

// Optimal tau equalizing the two terms of the interpolation bound.
double tau_tilde(double norm_r0, double norm_1, double r0, double mu0);

struct ThreeSphereReport {
  double r0 = 0.0, rho = 0.0, mu0 = 0.0;
  double theta = 0.0;
  double tau_tilde = 0.0;
  double norm_r0 = 0.0, norm_rho = 0.0, norm_1 = 0.0;
  double C_emp = 0.0;
  std::string branch;  // "tau_tilde>=tau_bar1" | "tau_tilde<tau_bar1" | "unreported" | "degenerate"
  bool pass = true;    // against C_declared when provided
};

ThreeSphereReport three_sphere_check(const ScalarField& u, double r0, double rho, double mu0,
                                     double C_declared = 0.0, double tau_bar1 = 0.0);

struct AnnulusSpec {
  double r_in = 0.0, r_out = 0.0;
};

struct CaccioppoliReport {
  AnnulusSpec inner, outer;
  double lhs = 0.0;         // int over inner annulus of |grad_g u|^2
  double rhs_raw = 0.0;     // int over outer annulus of u^2
  double r0 = 0.0;          // 2 * inner.r_out, per the nested-annuli pattern
  double ratio = 0.0;       // r0^2 lhs / rhs  (empirical constant)
};

CaccioppoliReport caccioppoli_ratio(const MetricField& metric, const ScalarField& u,
                                    AnnulusSpec inner, AnnulusSpec outer);

struct HarmonicFamilyRow {
  int k = 0;
  double norm_r0 = 0.0, norm_rho = 0.0, norm_1 = 0.0;
  double norm_1_analytic = 0.0;
  double theta = 0.0;
  double C_emp_numeric = 0.0;
  double C_emp_analytic = 0.0;  // (rho r0^{-theta})^{k+1}
  double max_norm_rel_error = 0.0;
  bool under_resolved = false;  // < 8 cells per oscillation at |x| = 1
};

// r^k cos(k theta) family on a 2D ball grid, numeric vs closed-form norms
// ||u_k||_{L^2(B_R)} = sqrt(pi R^{2k+2} / (2k+2)).
std::vector<HarmonicFamilyRow> harmonic_family_experiment(int k_max, double r0, double rho,
                                                          double mu0, GridPtr grid);

}  // namespace carleman
