#include "carleman/three_sphere.hpp"

#include <cmath>
#include <limits>

namespace carleman {

namespace {
constexpr double kPi = 3.14159265358979323846;

double radial_profile(double mu0, double t) { return std::exp(-mu0 * t * t); }
}  // namespace

double ball_norm(const ScalarField& u, double r) {
  const GridDomain& g = *u.grid;
  if (r > g.L + 1e-12) throw InvalidInput("ball_norm: radius exceeds the grid box");
  std::vector<double> w = region_weights(g, MaskSpec::ball(r));
  double acc = 0.0;
  for (std::size_t i = 0; i < g.n_nodes; ++i)
    if (w[i] > 0.0) acc += w[i] * u.values[i] * u.values[i];
  return std::sqrt(acc);
}

double theta_exponent(double r0, double rho, double mu0) {
  if (!(mu0 > 0.0)) throw InvalidInput("theta_exponent: mu0 must be > 0");
  if (!(rho > r0 / 2.0 && rho < 0.5))
    throw InvalidInput("theta_exponent: proof range requires r0/2 < rho < 1/2");
  const double p_half = radial_profile(mu0, 0.5);
  return (radial_profile(mu0, rho) - p_half) / (radial_profile(mu0, r0 / 4.0) - p_half);
}

double tau_tilde(double norm_r0, double norm_1, double r0, double mu0) {
  if (norm_r0 == 0.0)
    throw DegenerateSolution("tau_tilde: u vanishes on the inner ball (tau -> +inf branch)");
  if (!(norm_r0 > 0.0) || !(norm_1 > 0.0)) throw InvalidInput("tau_tilde: norms must be positive");
  const double denom = 2.0 * (radial_profile(mu0, r0 / 4.0) - radial_profile(mu0, 0.5));
  return std::log((norm_1 * norm_1) / (norm_r0 * norm_r0)) / denom;
}

ThreeSphereReport three_sphere_check(const ScalarField& u, double r0, double rho, double mu0,
                                     double C_declared, double tau_bar1) {
  ThreeSphereReport rep;
  rep.r0 = r0;
  rep.rho = rho;
  rep.mu0 = mu0;
  rep.theta = theta_exponent(r0, rho, mu0);

  rep.norm_r0 = ball_norm(u, r0);
  rep.norm_rho = ball_norm(u, rho);
  rep.norm_1 = ball_norm(u, 1.0);
  if (rep.norm_1 == 0.0) throw InvalidInput("three_sphere_check: u vanishes on B_1");

  try {
    rep.tau_tilde = tau_tilde(rep.norm_r0, rep.norm_1, r0, mu0);
    if (tau_bar1 > 0.0)
      rep.branch = rep.tau_tilde >= tau_bar1 ? "tau_tilde>=tau_bar1" : "tau_tilde<tau_bar1";
    else
      rep.branch = "unreported";
  } catch (const DegenerateSolution&) {
    rep.tau_tilde = std::numeric_limits<double>::infinity();
    rep.branch = "degenerate";
  }

  rep.C_emp = rep.norm_rho / (std::pow(rep.norm_r0, rep.theta) *
                              std::pow(rep.norm_1, 1.0 - rep.theta));
  if (C_declared > 0.0) rep.pass = rep.C_emp <= C_declared;
  return rep;
}

CaccioppoliReport caccioppoli_ratio(const MetricField& metric, const ScalarField& u,
                                    AnnulusSpec inner, AnnulusSpec outer) {
  if (!(outer.r_in < inner.r_in && inner.r_in < inner.r_out && inner.r_out < outer.r_out))
    throw InvalidInput("caccioppoli_ratio: annuli must be strictly nested");
  const GridDomain& g = *u.grid;

  CaccioppoliReport rep;
  rep.inner = inner;
  rep.outer = outer;
  rep.r0 = 2.0 * inner.r_out;

  ScalarField gn2 = grad_g_norm2(metric, u);
  std::vector<double> w_in = region_weights(g, MaskSpec::annulus(inner.r_in, inner.r_out));
  std::vector<double> w_out = region_weights(g, MaskSpec::annulus(outer.r_in, outer.r_out));
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    if (w_in[i] > 0.0) rep.lhs += w_in[i] * gn2.values[i];
    if (w_out[i] > 0.0) rep.rhs_raw += w_out[i] * u.values[i] * u.values[i];
  }
  if (rep.rhs_raw == 0.0)
    throw DegenerateSolution("caccioppoli_ratio: u vanishes on the outer annulus");
  rep.ratio = rep.r0 * rep.r0 * rep.lhs / rep.rhs_raw;
  return rep;
}

std::vector<HarmonicFamilyRow> harmonic_family_experiment(int k_max, double r0, double rho,
                                                          double mu0, GridPtr grid) {
  if (grid->dim != 2) throw InvalidInput("harmonic_family_experiment: 2D grids only");
  if (k_max < 1 || k_max > 10)
    throw InvalidInput("harmonic_family_experiment: k_max must be in [1, 10] (resolution-limited)");

  std::vector<HarmonicFamilyRow> table;
  const double theta = theta_exponent(r0, rho, mu0);
  for (int k = 1; k <= k_max; ++k) {
    ScalarField u = ScalarField::from_function(grid, [k](const Point& x) {
      const double r = x.norm();
      return std::pow(r, k) * std::cos(k * std::atan2(x[1], x[0]));
    });
    HarmonicFamilyRow row;
    row.k = k;
    row.theta = theta;
    row.norm_r0 = ball_norm(u, r0);
    row.norm_rho = ball_norm(u, rho);
    row.norm_1 = ball_norm(u, 1.0);
    row.norm_1_analytic = std::sqrt(kPi / (2.0 * k + 2.0));

    auto analytic = [&](double R) { return std::sqrt(kPi / (2.0 * k + 2.0)) * std::pow(R, k + 1); };
    row.max_norm_rel_error =
        std::max({std::abs(row.norm_r0 - analytic(r0)) / analytic(r0),
                  std::abs(row.norm_rho - analytic(rho)) / analytic(rho),
                  std::abs(row.norm_1 - analytic(1.0)) / analytic(1.0)});

    row.C_emp_numeric = row.norm_rho / (std::pow(row.norm_r0, theta) *
                                        std::pow(row.norm_1, 1.0 - theta));
    row.C_emp_analytic = std::pow(rho * std::pow(r0, -theta), k + 1);
    row.under_resolved = 2.0 * kPi / (k * grid->h) < 8.0;
    table.push_back(row);
  }
  return table;
}

}  // namespace carleman
