#pragma once

#include "carleman/fields.hpp"
#include "carleman/types.hpp"

#include <cmath>

namespace carleman::testing {

inline Point pt2(double a, double b) {
  Point x(2);
  x << a, b;
  return x;
}

inline Point pt3(double a, double b, double c) {
  Point x(3);
  x << a, b, c;
  return x;
}

// Non-diagonal, non-constant SPD metric with analytic derivatives.
inline MetricField wavy_metric() {
  MetricField m;
  m.dim = 2;
  m.name = "wavy";
  m.eval = [](const Point& x) {
    Mat g(2, 2);
    g << 1.0 + 0.1 * std::sin(x[0]), 0.05 * x[1], 0.05 * x[1], 1.2;
    return g;
  };
  m.grad_eval = [](const Point& x) {
    std::vector<Mat> dg(2, Mat::Zero(2, 2));
    dg[0](0, 0) = 0.1 * std::cos(x[0]);
    dg[1](0, 1) = dg[1](1, 0) = 0.05;
    return dg;
  };
  m.lambda_bound = 1.5;
  m.Lambda_bound = 0.3;
  return m;
}

}  // namespace carleman::testing
