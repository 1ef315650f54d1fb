#include "carleman/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace carleman {

void Csr::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) acc += val[k] * x[col[k]];
    y[i] = acc;
  }
}

LinearSystem assemble(const MetricField& metric, const CoefficientField& coeffs, GridPtr grid,
                      const std::function<double(const Point&)>& dirichlet,
                      const std::function<double(const Point&)>& source) {
  const GridDomain& g = *grid;
  if (g.mask.kind != MaskKind::Ball)
    throw InvalidInput("assemble: mask must be simply connected (ball)");

  DivFormOperator op(metric, grid);

  LinearSystem sys;
  sys.grid = grid;
  sys.symmetric = !coeffs.has_b();
  sys.unknown_of_node.assign(g.n_nodes, -1);
  sys.boundary_template = ScalarField::zeros(grid);

  // unknowns: mask nodes whose whole stencil box stays in the mask
  const std::size_t strides[3] = {1, static_cast<std::size_t>(g.n_axis),
                                  static_cast<std::size_t>(g.n_axis) * g.n_axis};
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    if (!g.in_mask[i] || !g.array_interior(i)) continue;
    int idx[3];
    g.unflatten(i, idx);
    bool interior = true;
    const int zlo = g.dim == 3 ? -1 : 0, zhi = g.dim == 3 ? 1 : 0;
    for (int a = -1; a <= 1 && interior; ++a)
      for (int b = -1; b <= 1 && interior; ++b)
        for (int c = zlo; c <= zhi && interior; ++c)
          if (!g.in_mask[g.index(idx[0] + a, idx[1] + b, idx[2] + c)]) interior = false;
    if (interior) {
      sys.unknown_of_node[i] = static_cast<int>(sys.node_of_unknown.size());
      sys.node_of_unknown.push_back(i);
    }
  }
  // Dirichlet band: remaining mask nodes
  for (std::size_t i = 0; i < g.n_nodes; ++i)
    if (g.in_mask[i] && sys.unknown_of_node[i] < 0)
      sys.boundary_template.values[i] = dirichlet(g.point(i));

  const int n = static_cast<int>(sys.node_of_unknown.size());
  if (n == 0) throw InvalidInput("assemble: no interior unknowns (grid too coarse)");
  sys.A.n = n;
  sys.A.row_ptr.assign(n + 1, 0);
  sys.rhs.assign(n, 0.0);

  double pe_max = 0.0;
  std::vector<std::map<std::size_t, double>> rows(n);
  for (int r = 0; r < n; ++r) {
    const std::size_t i = sys.node_of_unknown[r];
    const Point x = g.point(i);
    std::map<std::size_t, double>& row = rows[r];
    op.visit_row(i, [&](std::size_t j, double c) { row[j] += c; });

    if (coeffs.has_b()) {
      const Vec b = coeffs.b(x);
      for (int d = 0; d < g.dim; ++d) {
        row[i + strides[d]] += -b[d] / (2.0 * g.h);
        row[i - strides[d]] += b[d] / (2.0 * g.h);
      }
      pe_max = std::max(pe_max, b.norm() * g.h * metric.lambda_bound / 2.0);
    }
    if (coeffs.a) row[i] += -coeffs.a(x);
    if (source) sys.rhs[r] += source(x);
  }
  sys.peclet = pe_max;
  sys.peclet_warning = pe_max >= 2.0;

  for (int r = 0; r < n; ++r) {
    for (auto& [j, c] : rows[r]) {
      const int u = sys.unknown_of_node[j];
      if (u >= 0) {
        sys.A.col.push_back(u);
        sys.A.val.push_back(c);
      } else {
        sys.rhs[r] -= c * sys.boundary_template.values[j];
      }
    }
    sys.A.row_ptr[r + 1] = sys.A.col.size();
  }
  return sys;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

std::vector<double> jacobi_diag(const Csr& A) {
  std::vector<double> d(A.n, 1.0);
  for (int i = 0; i < A.n; ++i)
    for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      if (A.col[k] == i && A.val[k] != 0.0) d[i] = 1.0 / A.val[k];
  return d;
}

[[noreturn]] void fail_convergence(int max_iter, const std::vector<double>& trace) {
  std::ostringstream os;
  os << "no convergence in " << max_iter << " iterations; residual trace (tail):";
  const std::size_t from = trace.size() > 8 ? trace.size() - 8 : 0;
  for (std::size_t i = from; i < trace.size(); ++i) os << " " << trace[i];
  throw NonConvergence(os.str());
}

int pcg(const Csr& A, const std::vector<double>& rhs, std::vector<double>& x, double tol,
        int max_iter, std::vector<double>& trace) {
  const std::vector<double> prec = jacobi_diag(A);
  const double bnorm = norm(rhs);
  std::vector<double> r = rhs, z(A.n), p(A.n), Ap(A.n);
  x.assign(A.n, 0.0);
  for (int i = 0; i < A.n; ++i) z[i] = prec[i] * r[i];
  p = z;
  double rz = dot(r, z);
  double checkpoint = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iter; ++it) {
    A.multiply(p, Ap);
    const double pAp = dot(p, Ap);
    if (pAp == 0.0) return it;
    const double alpha = rz / pAp;
    for (int i = 0; i < A.n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    const double rel = norm(r) / bnorm;
    trace.push_back(rel);
    if (rel <= tol) return it;
    // already well converged and hovering at the rounding floor
    if (it % 100 == 0) {
      if (rel <= 1e-8 && rel > 0.99 * checkpoint) return it;
      checkpoint = rel;
    }
    for (int i = 0; i < A.n; ++i) z[i] = prec[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < A.n; ++i) p[i] = z[i] + beta * p[i];
  }
  fail_convergence(max_iter, trace);
}

int bicgstab(const Csr& A, const std::vector<double>& rhs, std::vector<double>& x, double tol,
             int max_iter, std::vector<double>& trace) {
  const std::vector<double> prec = jacobi_diag(A);
  const double bnorm = norm(rhs);
  std::vector<double> r = rhs, r0 = rhs, p(A.n, 0.0), v(A.n, 0.0), s(A.n), t(A.n), y(A.n), z(A.n);
  x.assign(A.n, 0.0);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  for (int it = 1; it <= max_iter; ++it) {
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0) return it;
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (int i = 0; i < A.n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (int i = 0; i < A.n; ++i) y[i] = prec[i] * p[i];
    A.multiply(y, v);
    const double r0v = dot(r0, v);
    if (r0v == 0.0) return it;
    alpha = rho / r0v;
    for (int i = 0; i < A.n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm(s) / bnorm <= tol) {
      for (int i = 0; i < A.n; ++i) x[i] += alpha * y[i];
      trace.push_back(norm(s) / bnorm);
      return it;
    }
    for (int i = 0; i < A.n; ++i) z[i] = prec[i] * s[i];
    A.multiply(z, t);
    const double tt = dot(t, t);
    omega = tt == 0.0 ? 0.0 : dot(t, s) / tt;
    for (int i = 0; i < A.n; ++i) {
      x[i] += alpha * y[i] + omega * z[i];
      r[i] = s[i] - omega * t[i];
    }
    const double rel = norm(r) / bnorm;
    trace.push_back(rel);
    if (rel <= tol) return it;
    if (omega == 0.0) return it;
  }
  fail_convergence(max_iter, trace);
}

}  // namespace

SolveReport solve(const LinearSystem& system, double tol, int max_iter) {
  SolveReport rep;
  rep.h = system.grid->h;
  rep.solution = system.boundary_template;

  const double bnorm = norm(system.rhs);
  std::vector<double> x;
  if (bnorm == 0.0) {
    x.assign(system.A.n, 0.0);
    rep.iterations = 0;
    rep.residual_norm = 0.0;
  } else {
    rep.iterations = system.symmetric
                         ? pcg(system.A, system.rhs, x, tol, max_iter, rep.residual_trace)
                         : bicgstab(system.A, system.rhs, x, tol, max_iter, rep.residual_trace);
    rep.residual_norm = rep.residual_trace.empty() ? 0.0 : rep.residual_trace.back();
  }
  for (int r = 0; r < system.A.n; ++r)
    rep.solution.values[system.node_of_unknown[r]] = x[r];
  return rep;
}

std::vector<ConvergenceRow> manufactured_check(const MetricField& metric,
                                               const CoefficientField& coeffs,
                                               const Expression& exact_u,
                                               const std::vector<int>& grid_sizes, double L,
                                               double ball_radius, double tol) {
  std::vector<ConvergenceRow> table;
  for (int N : grid_sizes) {
    GridPtr grid = make_grid(exact_u.dim(), L, N, MaskSpec::ball(ball_radius));
    auto u_star = [&](const Point& x) { return exact_u.eval(x); };
    auto f = [&](const Point& x) {
      MetricEval me = metric_eval(metric, x);
      const Vec grad = exact_u.gradient(x);
      const Mat hess = exact_u.hessian(x);
      double lap_g = (me.g_inv * hess).trace();
      for (int s = 0; s < metric.dim; ++s) lap_g += me.dg_inv[s].row(s).dot(grad);
      double val = lap_g;
      if (coeffs.has_b()) val -= coeffs.b(x).dot(grad);
      if (coeffs.a) val -= coeffs.a(x) * exact_u.eval(x);
      return val;
    };
    LinearSystem sys = assemble(metric, coeffs, grid, u_star, f);
    SolveReport rep = solve(sys, tol, 200000);

    ScalarField err = ScalarField::zeros(grid);
    for (std::size_t i = 0; i < grid->n_nodes; ++i)
      if (grid->in_mask[i])
        err.values[i] = std::pow(rep.solution.values[i] - u_star(grid->point(i)), 2);
    ConvergenceRow row;
    row.N = N;
    row.h = grid->h;
    row.l2_error = std::sqrt(integrate(err));
    if (!table.empty() && row.l2_error > 0.0)
      row.observed_order = std::log2(table.back().l2_error / row.l2_error) /
                           std::log2(table.back().h / row.h);
    table.push_back(row);
  }
  return table;
}

}  // namespace carleman
