#pragma once

#include "carleman/expression.hpp"
#include "carleman/fields.hpp"
#include "carleman/grid.hpp"
#include "carleman/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace carleman {

// Lower-order coefficients of  Lap_g u = <b, grad_g u> + a u.
struct CoefficientField {
  std::function<Vec(const Point&)> b;       // may be empty (b = 0)
  std::function<double(const Point&)> a;    // may be empty (a = 0)
  double M1_bound = 0.0;
  bool has_b() const { return static_cast<bool>(b); }
};

struct Csr {
  std::vector<std::size_t> row_ptr;
  std::vector<int> col;
  std::vector<double> val;
  int n = 0;
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
};

struct LinearSystem {
  GridPtr grid;
  Csr A;
  std::vector<double> rhs;
  std::vector<int> unknown_of_node;     // -1 at non-unknowns
  std::vector<std::size_t> node_of_unknown;
  ScalarField boundary_template;        // Dirichlet values on the band, 0 elsewhere
  bool symmetric = true;                // b == 0
  double peclet = 0.0;
  bool peclet_warning = false;
};

// Sparse system for  Lap_g u - <b, grad_g u> - a u = f  on a ball mask with
// Dirichlet rows eliminated. f is optional (zero reproduces the homogeneous
// equation).
LinearSystem assemble(const MetricField& metric, const CoefficientField& coeffs, GridPtr grid,
                      const std::function<double(const Point&)>& dirichlet,
                      const std::function<double(const Point&)>& source = {});

struct SolveReport {
  int iterations = 0;
  double residual_norm = 0.0;  // relative
  double h = 0.0;
  ScalarField solution;
  std::vector<double> residual_trace;
};

// Jacobi-preconditioned CG for symmetric systems, BiCGStab otherwise.
SolveReport solve(const LinearSystem& system, double tol = 1e-10, int max_iter = 20000);

struct ConvergenceRow {
  int N = 0;
  double h = 0.0;
  double l2_error = 0.0;
  double observed_order = 0.0;  // log2(e(h)/e(h/2)), 0 on the first row
};

// Manufactured-solution harness: source from the continuous operator applied
// to exact_u through the expression derivatives.
std::vector<ConvergenceRow> manufactured_check(const MetricField& metric,
                                               const CoefficientField& coeffs,
                                               const Expression& exact_u,
                                               const std::vector<int>& grid_sizes, double L,
                                               double ball_radius, double tol = 1e-12);

}  // namespace carleman
