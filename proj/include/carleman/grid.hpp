#pragma once

#include "carleman/fields.hpp"
#include "carleman/types.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace carleman {

enum class MaskKind { Ball, Annulus };

struct MaskSpec {
  MaskKind kind = MaskKind::Ball;
  double r_in = 0.0;
  double r_out = 1.0;

  static MaskSpec ball(double radius) { return {MaskKind::Ball, 0.0, radius}; }
  static MaskSpec annulus(double r_in, double r_out) { return {MaskKind::Annulus, r_in, r_out}; }
  bool contains(const Point& x) const;
};

// Node-centered Cartesian grid on [-L, L]^dim with spacing h = 2L/(N-1) and a
// two-layer padding ring outside the logical box, so masks may touch |x| = L
// while every stencil and the 2h collar invariant stay inside the array.
class GridDomain {
 public:
  int dim = 0;
  double L = 0.0;
  int N = 0;
  double h = 0.0;
  MaskSpec mask;
  int pad = 2;
  int n_axis = 0;            // N + 2 pad
  std::size_t n_nodes = 0;   // n_axis^dim

  std::vector<double> quad_w;      // mask quadrature weight per node (h^dim * cell fraction)
  std::vector<std::uint8_t> in_mask;
  std::vector<std::uint8_t> support;  // mask minus the 2-cell collar
  std::size_t mask_count = 0;

  double coord(int axis_index) const { return -L + (axis_index - pad) * h; }
  std::size_t index(int ix, int iy, int iz = 0) const {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(n_axis) * (static_cast<std::size_t>(iy) +
                                               static_cast<std::size_t>(n_axis) * iz);
  }
  void unflatten(std::size_t flat, int idx[3]) const;
  Point point(std::size_t flat) const;
  bool array_interior(std::size_t flat) const;  // one layer away from array edge

  // h^dim * (fraction of the node cell inside `inside`), by 3^dim subsamples.
  double cell_weight(std::size_t flat, const std::function<bool(const Point&)>& inside) const;
};

using GridPtr = std::shared_ptr<const GridDomain>;

GridPtr make_grid(int dim, double L, int N, MaskSpec mask);

struct ScalarField {
  GridPtr grid;
  std::vector<double> values;

  static ScalarField zeros(GridPtr grid);
  static ScalarField from_function(GridPtr grid, const std::function<double(const Point&)>& f);
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

// Symmetric divergence-form stencil for div(g^{-1} grad u): conservative
// face fluxes for the diagonal entries of g^{-1} plus nested centered
// differences for the off-diagonal couplings. <Au, w>_h = <u, Aw>_h exactly
// for compactly supported fields.
class DivFormOperator {
 public:
  DivFormOperator(const MetricField& metric, GridPtr grid);

  ScalarField apply(const ScalarField& u) const;
  GridPtr grid() const { return grid_; }

  // Stencil visitor used by the solver assembly: calls fn(neighbor, coeff)
  // for every matrix entry of row `flat`, diagonal included.
  void visit_row(std::size_t flat,
                 const std::function<void(std::size_t, double)>& fn) const;

 private:
  GridPtr grid_;
  std::vector<std::vector<double>> face_;   // [axis][node]: g^{dd} at face node -> node+e_d
  std::vector<std::vector<double>> cross_;  // [pair][node]: g^{de} at node, pairs (0,1),(0,2),(1,2)
  std::vector<std::size_t> stride_;
};

ScalarField laplace_beltrami(const MetricField& metric, const ScalarField& u);

// Centered Euclidean gradient mapped through g^{-1}; components as fields.
std::vector<ScalarField> gradient_g(const MetricField& metric, const ScalarField& u);

// Pointwise |grad_g u|^2 in the g-norm, i.e. grad u . g^{-1} grad u.
ScalarField grad_g_norm2(const MetricField& metric, const ScalarField& u);

// Mask-quadrature integral of `f`, optionally times a pointwise weight field.
double integrate(const ScalarField& f, const std::vector<double>* pointwise = nullptr);

// Quadrature weights for a ball / annulus region inside the grid box.
std::vector<double> region_weights(const GridDomain& grid, const MaskSpec& region);

struct CutoffFunction {
  double r0 = 0.0;
  double c_emp = 0.0;  // measured constant of the derivative bounds
  double eval(double t) const;
  double deriv(double t, int order) const;  // order 0, 1, 2
};

// Radial C^2 profile: 0 on (0, r0/4), quintic rise to 1 on (r0/4, r0/2),
// plateau to 1/2, quintic fall on (1/2, 2/3), 0 beyond.
CutoffFunction make_cutoff(double r0);
ScalarField apply_cutoff(const CutoffFunction& eta, const ScalarField& u);

// Radial bump exp(1 - 1/(1 - s^2)), s = |x - center| / radius; seed != 0 draws
// a superposition of five bumps with coefficients in [-1, 1].
ScalarField make_bump(GridPtr grid, const Point& center, double radius, std::uint64_t seed = 0);

// Deterministic + seeded test-function corpus supported in the mask.
std::vector<ScalarField> bump_corpus(GridPtr grid, int deterministic, int seeded,
                                     std::uint64_t seed);

}  // namespace carleman
