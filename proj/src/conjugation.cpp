#include "carleman/conjugation.hpp"

#include "carleman/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace carleman {

namespace {

double mask_max_abs(const ScalarField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.grid->n_nodes; ++i)
    if (f.grid->quad_w[i] > 0.0) m = std::max(m, std::abs(f.values[i]));
  return m;
}

double mask_max(const ScalarField& f) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.grid->n_nodes; ++i)
    if (f.grid->quad_w[i] > 0.0) m = std::max(m, f.values[i]);
  return m;
}

}  // namespace

ConjugatedApplication conjugate(const MetricField& metric, const WeightFunction& phi,
                                const ScalarField& v, double tau) {
  const GridDomain& g = *v.grid;
  ScalarField phi_vals = ScalarField::from_function(v.grid, phi.eval);
  const double phi_abs = mask_max_abs(phi_vals);
  if (std::abs(tau) * phi_abs > kExpGuard) throw WeightOverflow(tau, phi_abs);
  const double shift = mask_max(phi_vals);

  DivFormOperator op(metric, v.grid);

  ConjugatedApplication out;
  out.tau = tau;

  // direct: conjugation computed literally (with the exp shift, which cancels)
  ScalarField w = ScalarField::zeros(v.grid);
  parallel_for(g.n_nodes, [&](std::size_t i) {
    w.values[i] = std::exp(-tau * (phi_vals.values[i] - shift)) * v.values[i];
  });
  ScalarField lap_w = op.apply(w);
  out.direct = ScalarField::zeros(v.grid);
  parallel_for(g.n_nodes, [&](std::size_t i) {
    out.direct.values[i] = std::exp(tau * (phi_vals.values[i] - shift)) * lap_w.values[i];
  });

  // expanded: S
  ScalarField lap_v = op.apply(v);
  out.S_part = ScalarField::zeros(v.grid);
  out.A_part = ScalarField::zeros(v.grid);
  out.expanded = ScalarField::zeros(v.grid);
  const std::size_t strides[3] = {1, static_cast<std::size_t>(g.n_axis),
                                  static_cast<std::size_t>(g.n_axis) * g.n_axis};
  parallel_for(g.n_nodes, [&](std::size_t i) {
    if (!g.array_interior(i)) return;
    const Point x = g.point(i);
    MetricEval me = metric_eval(metric, x);
    const Vec dphi = phi.grad(x);
    const Vec gphi = me.g_inv * dphi;
    const double gphi_norm2 = dphi.dot(gphi);

    Vec grad_v(g.dim);
    for (int d = 0; d < g.dim; ++d)
      grad_v[d] = (v.values[i + strides[d]] - v.values[i - strides[d]]) / (2.0 * g.h);

    double lap_g_phi = (me.g_inv * phi.hess(x)).trace();
    for (int s = 0; s < g.dim; ++s) lap_g_phi += me.dg_inv[s].row(s).dot(dphi);

    out.S_part.values[i] = lap_v.values[i] + tau * tau * gphi_norm2 * v.values[i];
    out.A_part.values[i] = -2.0 * tau * gphi.dot(grad_v) - tau * lap_g_phi * v.values[i];
    out.expanded.values[i] = out.S_part.values[i] + out.A_part.values[i];
  });
  return out;
}

RellichResult rellich_residual(const MetricField& metric, const VectorFieldB& B,
                               const ScalarField& f) {
  const GridDomain& g = *f.grid;
  ScalarField lap_f = laplace_beltrami(metric, f);

  std::vector<double> lhs_cell(g.n_nodes, 0.0), rhs_cell(g.n_nodes, 0.0);
  const std::size_t strides[3] = {1, static_cast<std::size_t>(g.n_axis),
                                  static_cast<std::size_t>(g.n_axis) * g.n_axis};
  parallel_for(g.n_nodes, [&](std::size_t i) {
    if (g.quad_w[i] == 0.0 || !g.array_interior(i)) return;
    const Point x = g.point(i);
    Vec grad_f(g.dim);
    for (int d = 0; d < g.dim; ++d)
      grad_f[d] = (f.values[i + strides[d]] - f.values[i - strides[d]]) / (2.0 * g.h);

    MetricEval me = metric_eval(metric, x);
    const Vec grad_g_f = me.g_inv * grad_f;
    const Vec b = B.eval(x);
    const Mat jac = B.jacobian(x);

    // <B, grad_g f> = B . grad f  (the g factors cancel)
    lhs_cell[i] = 2.0 * b.dot(grad_f) * lap_f.values[i];

    double rhs = jac.trace() * grad_f.dot(grad_g_f);     // div(B) |grad_g f|^2
    rhs -= 2.0 * grad_g_f.dot(jac * grad_f);             // -2 (d_i B^k) g^{ij} d_j f d_k f
    for (int k = 0; k < g.dim; ++k)                      // B^k (d_k g^{ij}) d_i f d_j f
      rhs += b[k] * grad_f.dot(me.dg_inv[k] * grad_f);
    rhs_cell[i] = rhs;
  });

  RellichResult out;
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    out.lhs += g.quad_w[i] * lhs_cell[i];
    out.rhs += g.quad_w[i] * rhs_cell[i];
    out.abs_mass += g.quad_w[i] * (std::abs(lhs_cell[i]) + std::abs(rhs_cell[i]));
  }
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

namespace {

struct RatioParts {
  double lhs = 0.0, rhs = 0.0;
};

RatioParts weighted_parts(const GridDomain& g, const ScalarField& u, const ScalarField& gn2,
                          const ScalarField& lap_u, const std::vector<double>& phi_vals,
                          double shift, double tau) {
  RatioParts p;
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    if (g.quad_w[i] == 0.0) continue;
    const double w = std::exp(2.0 * tau * (phi_vals[i] - shift));
    const double ui = u.values[i];
    p.lhs += g.quad_w[i] * (gn2.values[i] + tau * tau * ui * ui) * w;
    p.rhs += g.quad_w[i] * lap_u.values[i] * lap_u.values[i] * w;
  }
  p.lhs *= tau;
  return p;
}

}  // namespace

double carleman_ratio(const MetricField& metric, const WeightFunction& phi, const ScalarField& u,
                      double tau) {
  if (!(tau > 0.0)) throw InvalidInput("carleman_ratio: tau must be > 0");
  const GridDomain& g = *u.grid;
  if (mask_max_abs(u) == 0.0) throw InvalidInput("carleman_ratio: u vanishes on the mask");

  ScalarField phi_vals = ScalarField::from_function(u.grid, phi.eval);
  if (tau * mask_max_abs(phi_vals) > kExpGuard) throw WeightOverflow(tau, mask_max_abs(phi_vals));
  const double shift = mask_max(phi_vals);

  ScalarField lap_u = laplace_beltrami(metric, u);
  ScalarField gn2 = grad_g_norm2(metric, u);
  RatioParts p = weighted_parts(g, u, gn2, lap_u, phi_vals.values, shift, tau);
  if (p.rhs == 0.0) return std::numeric_limits<double>::infinity();  // u in the discrete kernel
  return p.lhs / p.rhs;
}

TauSweepReport tau_sweep(const MetricField& metric, const WeightFunction& phi,
                         const std::vector<ScalarField>& test_functions, double tau_min,
                         double tau_max, int n_tau, double tau_h_rule) {
  if (test_functions.empty()) throw InvalidInput("tau_sweep: empty test function list");
  if (!(tau_min > 0.0) || tau_max < tau_min || n_tau < 1)
    throw InvalidInput("tau_sweep: bad tau grid");
  const GridDomain& g = *test_functions.front().grid;

  TauSweepReport rep;
  rep.tau_grid.resize(n_tau);
  for (int j = 0; j < n_tau; ++j)
    rep.tau_grid[j] = n_tau == 1
                          ? tau_min
                          : tau_min * std::pow(tau_max / tau_min, j / double(n_tau - 1));
  rep.trusted_tau_max = tau_h_rule / g.h;

  const std::size_t n_f = test_functions.size();
  rep.lhs.assign(n_f, std::vector<double>(n_tau, 0.0));
  rep.rhs.assign(n_f, std::vector<double>(n_tau, 0.0));
  rep.ratios.assign(n_f, std::vector<double>(n_tau, 0.0));
  rep.test_function_ids.resize(n_f);

  ScalarField phi_vals = ScalarField::from_function(test_functions.front().grid, phi.eval);
  const double phi_abs = mask_max_abs(phi_vals);
  if (tau_max * phi_abs > kExpGuard) throw WeightOverflow(tau_max, phi_abs);
  const double shift = mask_max(phi_vals);
  DivFormOperator op(metric, test_functions.front().grid);

  for (const ScalarField& u : test_functions)
    if (mask_max_abs(u) == 0.0) throw InvalidInput("tau_sweep: test function vanishes");

  parallel_for(n_f, [&](std::size_t f) {
    const ScalarField& u = test_functions[f];
    ScalarField lap_u = op.apply(u);
    ScalarField gn2 = grad_g_norm2(metric, u);
    for (int j = 0; j < n_tau; ++j) {
      RatioParts p =
          weighted_parts(g, u, gn2, lap_u, phi_vals.values, shift, rep.tau_grid[j]);
      rep.lhs[f][j] = p.lhs;
      rep.rhs[f][j] = p.rhs;
      rep.ratios[f][j] =
          p.rhs == 0.0 ? std::numeric_limits<double>::infinity() : p.lhs / p.rhs;
    }
    rep.test_function_ids[f] = "u" + std::to_string(f);
  });

  // plateau detection on the max ratio per tau: growth < 5% per doubling
  std::vector<double> rmax(n_tau, 0.0);
  for (int j = 0; j < n_tau; ++j)
    for (std::size_t f = 0; f < n_f; ++f) rmax[j] = std::max(rmax[j], rep.ratios[f][j]);

  int j0 = -1;
  for (int j = 0; j < n_tau; ++j) {
    bool plateau = true;
    for (int k = j; k + 1 < n_tau && plateau; ++k) {
      const double per_doubling =
          std::pow(rmax[k + 1] / rmax[k], 1.0 / std::log2(rep.tau_grid[k + 1] / rep.tau_grid[k]));
      if (!(per_doubling < 1.05)) plateau = false;
    }
    if (plateau) {
      j0 = j;
      break;
    }
  }
  if (j0 < 0 || !std::isfinite(rmax[j0])) {
    std::ostringstream os;
    os << "ratio still growing at tau_max = " << tau_max << " (max ratio " << rmax.back()
       << "); certificate/discretization mismatch suspected";
    throw PlateauNotFound(os.str());
  }
  rep.tau0_emp = rep.tau_grid[j0];
  rep.K_emp = 0.0;
  for (int j = j0; j < n_tau; ++j) rep.K_emp = std::max(rep.K_emp, rmax[j]);
  return rep;
}

}  // namespace carleman
