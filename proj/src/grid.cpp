#include "carleman/grid.hpp"

#include "carleman/parallel.hpp"
#include "carleman/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace carleman {

bool MaskSpec::contains(const Point& x) const {
  const double r = x.norm();
  if (kind == MaskKind::Ball) return r <= r_out;
  return r >= r_in && r <= r_out;
}

void GridDomain::unflatten(std::size_t flat, int idx[3]) const {
  idx[0] = static_cast<int>(flat % n_axis);
  idx[1] = static_cast<int>((flat / n_axis) % n_axis);
  idx[2] = dim == 3 ? static_cast<int>(flat / (static_cast<std::size_t>(n_axis) * n_axis)) : 0;
}

Point GridDomain::point(std::size_t flat) const {
  int idx[3];
  unflatten(flat, idx);
  Point x(dim);
  for (int d = 0; d < dim; ++d) x[d] = coord(idx[d]);
  return x;
}

bool GridDomain::array_interior(std::size_t flat) const {
  int idx[3];
  unflatten(flat, idx);
  for (int d = 0; d < dim; ++d)
    if (idx[d] < 1 || idx[d] > n_axis - 2) return false;
  return true;
}

double GridDomain::cell_weight(std::size_t flat,
                               const std::function<bool(const Point&)>& inside) const {
  const Point c = point(flat);
  const double off = h / 3.0;
  int hits = 0, total = 0;
  Point x = c;
  const int n1 = 3, n2 = 3, n3 = dim == 3 ? 3 : 1;
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n2; ++b)
      for (int g = 0; g < n3; ++g) {
        x[0] = c[0] + (a - 1) * off;
        x[1] = c[1] + (b - 1) * off;
        if (dim == 3) x[2] = c[2] + (g - 1) * off;
        ++total;
        if (inside(x)) ++hits;
      }
  return std::pow(h, dim) * hits / total;
}

namespace {

void check_mask_resolution(int dim, double L, int N, const MaskSpec& mask, double h) {
  if (dim < 2 || dim > 3) throw InvalidInput("make_grid: dim must be 2 or 3");
  if (N < 16) throw InvalidInput("make_grid: N must be >= 16");
  if (!(mask.r_out > 0.0) || mask.r_out > L)
    throw InvalidInput("make_grid: mask must fit inside [-L, L]^dim");
  if (mask.kind == MaskKind::Annulus) {
    if (!(mask.r_in > 0.0) || mask.r_in >= mask.r_out)
      throw InvalidInput("make_grid: annulus needs 0 < r_in < r_out");
    if (2.0 * mask.r_in / h < 8.0)
      throw InvalidInput("make_grid: annulus hole under-resolved (need 2 r_in / h >= 8)");
  }
}

void check_connected(const GridDomain& g) {
  // flood fill over mask nodes along axis neighbors
  std::size_t start = g.n_nodes;
  for (std::size_t i = 0; i < g.n_nodes; ++i)
    if (g.in_mask[i]) {
      start = i;
      break;
    }
  if (start == g.n_nodes) throw InvalidInput("make_grid: empty mask");
  std::vector<std::uint8_t> seen(g.n_nodes, 0);
  std::deque<std::size_t> queue{start};
  seen[start] = 1;
  std::size_t visited = 1;
  const std::size_t strides[3] = {1, static_cast<std::size_t>(g.n_axis),
                                  static_cast<std::size_t>(g.n_axis) * g.n_axis};
  while (!queue.empty()) {
    const std::size_t p = queue.front();
    queue.pop_front();
    int idx[3];
    g.unflatten(p, idx);
    for (int d = 0; d < g.dim; ++d)
      for (int s = -1; s <= 1; s += 2) {
        if (idx[d] + s < 0 || idx[d] + s >= g.n_axis) continue;
        const std::size_t q = s > 0 ? p + strides[d] : p - strides[d];
        if (g.in_mask[q] && !seen[q]) {
          seen[q] = 1;
          ++visited;
          queue.push_back(q);
        }
      }
  }
  if (visited != g.mask_count) throw InvalidInput("make_grid: mask is not connected");
}

}  // namespace

GridPtr make_grid(int dim, double L, int N, MaskSpec mask) {
  auto g = std::make_shared<GridDomain>();
  g->dim = dim;
  g->L = L;
  g->N = N;
  g->h = 2.0 * L / (N - 1);
  g->mask = mask;
  check_mask_resolution(dim, L, N, mask, g->h);

  g->n_axis = N + 2 * g->pad;
  g->n_nodes = 1;
  for (int d = 0; d < dim; ++d) g->n_nodes *= g->n_axis;

  g->in_mask.assign(g->n_nodes, 0);
  g->quad_w.assign(g->n_nodes, 0.0);
  g->support.assign(g->n_nodes, 0);

  auto inside = [&mask](const Point& x) { return mask.contains(x); };
  std::vector<double> quad(g->n_nodes, 0.0);
  std::vector<std::uint8_t> in(g->n_nodes, 0);
  parallel_for(g->n_nodes, [&](std::size_t i) {
    const Point x = g->point(i);
    in[i] = mask.contains(x) ? 1 : 0;
    // boundary cells keep their sampled overlap fraction even when the node
    // itself falls just outside the mask
    const double r = x.norm();
    const double reach = 0.5 * g->h * std::sqrt(static_cast<double>(dim)) + 1e-12;
    const bool near = (r <= mask.r_out + reach) &&
                      (mask.kind == MaskKind::Ball || r >= mask.r_in - reach);
    if (near) quad[i] = g->cell_weight(i, inside);
  });
  g->in_mask = std::move(in);
  g->quad_w = std::move(quad);
  g->mask_count = 0;
  for (auto b : g->in_mask) g->mask_count += b;

  // support = mask nodes whose Chebyshev-2 neighborhood stays in the mask;
  // their cells carry full weight, which the symmetry identities rely on
  const int R = 2;
  for (std::size_t i = 0; i < g->n_nodes; ++i) {
    if (!g->in_mask[i]) continue;
    int idx[3];
    g->unflatten(i, idx);
    bool ok = true;
    const int zlo = dim == 3 ? -R : 0, zhi = dim == 3 ? R : 0;
    for (int a = -R; a <= R && ok; ++a)
      for (int b = -R; b <= R && ok; ++b)
        for (int c = zlo; c <= zhi && ok; ++c) {
          const int jx = idx[0] + a, jy = idx[1] + b, jz = idx[2] + c;
          if (jx < 0 || jy < 0 || jz < 0 || jx >= g->n_axis || jy >= g->n_axis ||
              jz >= g->n_axis) {
            ok = false;
          } else if (!g->in_mask[g->index(jx, jy, jz)]) {
            ok = false;
          }
        }
    g->support[i] = ok ? 1 : 0;
  }

  check_connected(*g);
  return g;
}

ScalarField ScalarField::zeros(GridPtr grid) {
  ScalarField f;
  f.grid = std::move(grid);
  f.values.assign(f.grid->n_nodes, 0.0);
  return f;
}

ScalarField ScalarField::from_function(GridPtr grid,
                                       const std::function<double(const Point&)>& fn) {
  ScalarField f = zeros(std::move(grid));
  parallel_for(f.grid->n_nodes, [&](std::size_t i) { f.values[i] = fn(f.grid->point(i)); });
  return f;
}

// --- divergence-form operator -----------------------------------------------

DivFormOperator::DivFormOperator(const MetricField& metric, GridPtr grid) : grid_(std::move(grid)) {
  const GridDomain& g = *grid_;
  if (metric.dim != g.dim) throw InvalidInput("DivFormOperator: metric/grid dim mismatch");
  stride_ = {1, static_cast<std::size_t>(g.n_axis),
             static_cast<std::size_t>(g.n_axis) * g.n_axis};

  face_.assign(g.dim, std::vector<double>(g.n_nodes, 0.0));
  const int n_pairs = g.dim == 3 ? 3 : 1;
  cross_.assign(n_pairs, std::vector<double>(g.n_nodes, 0.0));

  parallel_for(g.n_nodes, [&](std::size_t i) {
    int idx[3];
    g.unflatten(i, idx);
    Point x = g.point(i);
    const Mat ginv_node = metric.eval(x).inverse();
    if (g.dim == 2) {
      cross_[0][i] = ginv_node(0, 1);
    } else {
      cross_[0][i] = ginv_node(0, 1);
      cross_[1][i] = ginv_node(0, 2);
      cross_[2][i] = ginv_node(1, 2);
    }
    for (int d = 0; d < g.dim; ++d) {
      if (idx[d] >= g.n_axis - 1) continue;
      Point m = x;
      m[d] += 0.5 * g.h;
      face_[d][i] = metric.eval(m).inverse()(d, d);
    }
  });
}

void DivFormOperator::visit_row(std::size_t flat,
                                const std::function<void(std::size_t, double)>& fn) const {
  const GridDomain& g = *grid_;
  const double h2 = g.h * g.h;
  for (int d = 0; d < g.dim; ++d) {
    const double cp = face_[d][flat] / h2;
    const double cm = face_[d][flat - stride_[d]] / h2;
    fn(flat + stride_[d], cp);
    fn(flat - stride_[d], cm);
    fn(flat, -(cp + cm));
  }
  auto cross_pair = [&](int pair, int d, int e) {
    // D_d(s D_e u) + D_e(s D_d u), both centered
    const double q = 1.0 / (4.0 * h2);
    const double sp_d = cross_[pair][flat + stride_[d]] * q;
    const double sm_d = cross_[pair][flat - stride_[d]] * q;
    const double sp_e = cross_[pair][flat + stride_[e]] * q;
    const double sm_e = cross_[pair][flat - stride_[e]] * q;
    fn(flat + stride_[d] + stride_[e], sp_d + sp_e);
    fn(flat + stride_[d] - stride_[e], -sp_d - sm_e);
    fn(flat - stride_[d] + stride_[e], -sm_d - sp_e);
    fn(flat - stride_[d] - stride_[e], sm_d + sm_e);
  };
  if (g.dim == 2) {
    cross_pair(0, 0, 1);
  } else {
    cross_pair(0, 0, 1);
    cross_pair(1, 0, 2);
    cross_pair(2, 1, 2);
  }
}

ScalarField DivFormOperator::apply(const ScalarField& u) const {
  const GridDomain& g = *grid_;
  ScalarField out = ScalarField::zeros(grid_);
  parallel_for(g.n_nodes, [&](std::size_t i) {
    if (!g.array_interior(i)) return;
    double acc = 0.0;
    visit_row(i, [&](std::size_t j, double c) { acc += c * u.values[j]; });
    out.values[i] = acc;
  });
  return out;
}

ScalarField laplace_beltrami(const MetricField& metric, const ScalarField& u) {
  return DivFormOperator(metric, u.grid).apply(u);
}

std::vector<ScalarField> gradient_g(const MetricField& metric, const ScalarField& u) {
  const GridDomain& g = *u.grid;
  std::vector<ScalarField> out(g.dim, ScalarField::zeros(u.grid));
  const std::size_t strides[3] = {1, static_cast<std::size_t>(g.n_axis),
                                  static_cast<std::size_t>(g.n_axis) * g.n_axis};
  parallel_for(g.n_nodes, [&](std::size_t i) {
    if (!g.array_interior(i)) return;
    Vec grad(g.dim);
    for (int d = 0; d < g.dim; ++d)
      grad[d] = (u.values[i + strides[d]] - u.values[i - strides[d]]) / (2.0 * g.h);
    const Vec gg = metric.eval(g.point(i)).llt().solve(grad);
    for (int d = 0; d < g.dim; ++d) out[d].values[i] = gg[d];
  });
  return out;
}

ScalarField grad_g_norm2(const MetricField& metric, const ScalarField& u) {
  const GridDomain& g = *u.grid;
  ScalarField out = ScalarField::zeros(u.grid);
  const std::size_t strides[3] = {1, static_cast<std::size_t>(g.n_axis),
                                  static_cast<std::size_t>(g.n_axis) * g.n_axis};
  parallel_for(g.n_nodes, [&](std::size_t i) {
    if (!g.array_interior(i)) return;
    Vec grad(g.dim);
    for (int d = 0; d < g.dim; ++d)
      grad[d] = (u.values[i + strides[d]] - u.values[i - strides[d]]) / (2.0 * g.h);
    out.values[i] = grad.dot(metric.eval(g.point(i)).llt().solve(grad));
  });
  return out;
}

double integrate(const ScalarField& f, const std::vector<double>* pointwise) {
  const GridDomain& g = *f.grid;
  double acc = 0.0;
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    if (g.quad_w[i] == 0.0) continue;
    double v = g.quad_w[i] * f.values[i];
    if (pointwise) v *= (*pointwise)[i];
    acc += v;
  }
  return acc;
}

std::vector<double> region_weights(const GridDomain& grid, const MaskSpec& region) {
  if (region.r_out > grid.L + 1e-12)
    throw InvalidInput("region_weights: region exceeds the grid box");
  std::vector<double> w(grid.n_nodes, 0.0);
  auto inside = [&region](const Point& x) { return region.contains(x); };
  parallel_for(grid.n_nodes, [&](std::size_t i) {
    const Point x = grid.point(i);
    const double r = x.norm();
    const double reach = 0.5 * grid.h * std::sqrt(static_cast<double>(grid.dim)) + 1e-12;
    const bool near = (r <= region.r_out + reach) &&
                      (region.kind == MaskKind::Ball || r >= region.r_in - reach);
    if (near) w[i] = grid.cell_weight(i, inside);
  });
  return w;
}

// --- cutoff -----------------------------------------------------------------

namespace {

double smoothstep(double s, int order) {
  // 6 s^5 - 15 s^4 + 10 s^3 and derivatives
  switch (order) {
    case 0: return ((6.0 * s - 15.0) * s + 10.0) * s * s * s;
    case 1: return ((30.0 * s - 60.0) * s + 30.0) * s * s;
    default: return ((120.0 * s - 180.0) * s + 60.0) * s;
  }
}

}  // namespace

double CutoffFunction::eval(double t) const { return deriv(t, 0); }

double CutoffFunction::deriv(double t, int order) const {
  const double a0 = r0 / 4.0, a1 = r0 / 2.0;
  const double b0 = 0.5, b1 = 2.0 / 3.0;
  if (t <= a0 || t >= b1) return 0.0;
  if (t < a1) {
    const double w = a1 - a0;
    const double v = smoothstep((t - a0) / w, order);
    return v / std::pow(w, order);
  }
  if (t <= b0) return order == 0 ? 1.0 : 0.0;
  const double w = b1 - b0;
  const double v = smoothstep((t - b0) / w, order);
  return (order == 0 ? 1.0 - v : -v / std::pow(w, order));
}

CutoffFunction make_cutoff(double r0) {
  if (!(r0 > 0.0 && r0 < 0.5)) throw InvalidInput("make_cutoff: need 0 < r0 < 1/2");
  CutoffFunction eta;
  eta.r0 = r0;
  // measured constant of |eta^(k)| <= c r0^{-k} (rise) and <= c (fall)
  double c = 0.0;
  const int steps = 2000;
  for (int i = 0; i <= steps; ++i) {
    const double t = i / static_cast<double>(steps);
    for (int k = 0; k <= 2; ++k) {
      const double v = std::abs(eta.deriv(t, k));
      if (t < r0 / 2.0)
        c = std::max(c, v * std::pow(r0, k));
      else
        c = std::max(c, v);
    }
  }
  eta.c_emp = c;
  return eta;
}

ScalarField apply_cutoff(const CutoffFunction& eta, const ScalarField& u) {
  ScalarField out = u;
  for (std::size_t i = 0; i < u.grid->n_nodes; ++i)
    out.values[i] = u.values[i] * eta.eval(u.grid->point(i).norm());
  return out;
}

// --- bumps ------------------------------------------------------------------

namespace {

double bump_value(const Point& x, const Point& center, double radius) {
  const double s2 = (x - center).squaredNorm() / (radius * radius);
  if (s2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s2));
}

bool bump_fits(const GridDomain& g, const Point& center, double radius) {
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    if (g.support[i]) continue;
    if ((g.point(i) - center).norm() < radius) return false;
  }
  return true;
}

void add_bump(ScalarField& f, const Point& center, double radius, double coeff) {
  const GridDomain& g = *f.grid;
  parallel_for(g.n_nodes, [&](std::size_t i) {
    const double v = bump_value(g.point(i), center, radius);
    if (v != 0.0) f.values[i] += coeff * v;
  });
}

}  // namespace

ScalarField make_bump(GridPtr grid, const Point& center, double radius, std::uint64_t seed) {
  const GridDomain& g = *grid;
  if (seed == 0) {
    if (!bump_fits(g, center, radius))
      throw InvalidInput("make_bump: support not strictly inside the mask");
    ScalarField f = ScalarField::zeros(grid);
    add_bump(f, center, radius, 1.0);
    return f;
  }

  std::mt19937_64 rng(seed);
  ScalarField f = ScalarField::zeros(grid);
  const double span = g.mask.kind == MaskKind::Ball ? g.mask.r_out
                                                    : 0.5 * (g.mask.r_out - g.mask.r_in);
  int placed = 0;
  int attempts = 0;
  while (placed < 5) {
    if (++attempts > 4000) throw InvalidInput("make_bump: could not place seeded bumps in mask");
    Point c(g.dim);
    for (int d = 0; d < g.dim; ++d) c[d] = uniform(rng, -g.mask.r_out, g.mask.r_out);
    const double rad = uniform(rng, 0.35 * span, 0.7 * span);
    if (!g.mask.contains(c) || !bump_fits(g, c, rad)) continue;
    double coeff = uniform(rng, -1.0, 1.0);
    if (std::abs(coeff) < 0.1) coeff = coeff < 0 ? -0.1 : 0.1;  // keep the field nontrivial
    add_bump(f, c, rad, coeff);
    ++placed;
  }
  return f;
}

std::vector<ScalarField> bump_corpus(GridPtr grid, int deterministic, int seeded,
                                     std::uint64_t seed) {
  const GridDomain& g = *grid;
  std::vector<ScalarField> out;
  out.reserve(deterministic + seeded);

  const double mid = g.mask.kind == MaskKind::Ball ? 0.0 : 0.5 * (g.mask.r_in + g.mask.r_out);
  const double span = g.mask.kind == MaskKind::Ball ? g.mask.r_out
                                                    : 0.5 * (g.mask.r_out - g.mask.r_in);
  for (int k = 0; k < deterministic; ++k) {
    const double angle = 2.0 * 3.14159265358979323846 * k / std::max(1, deterministic);
    Point c = Point::Zero(g.dim);
    if (mid > 0.0) {
      c[0] = mid * std::cos(angle);
      c[1] = mid * std::sin(angle);
    }
    double rad = 0.55 * span;
    while (rad > 0.05 * span && !bump_fits(g, c, rad)) rad *= 0.9;
    out.push_back(make_bump(grid, c, rad));
  }
  for (int k = 0; k < seeded; ++k)
    out.push_back(make_bump(grid, Point::Zero(g.dim), 0.0, derive_seed(seed, k + 1)));
  return out;
}

}  // namespace carleman
