#pragma once

#include <Eigen/Dense>

#include <sstream>
#include <stdexcept>
#include <string>

namespace carleman {

using Point = Eigen::VectorXd;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline std::string point_str(const Point& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

// Error taxonomy shared by all modules.
struct InvalidInput : std::runtime_error {
  explicit InvalidInput(const std::string& what) : std::runtime_error("InvalidInput: " + what) {}
};

struct DegenerateMetric : std::runtime_error {
  explicit DegenerateMetric(const Point& x, const std::string& what = "metric not SPD")
      : std::runtime_error("DegenerateMetric at " + point_str(x) + ": " + what) {}
};

struct ZeroGradient : std::runtime_error {
  explicit ZeroGradient(const Point& x)
      : std::runtime_error("ZeroGradient: |grad| = 0 at " + point_str(x)) {}
};

struct WeightOverflow : std::runtime_error {
  explicit WeightOverflow(double tau, double phi_scale)
      : std::runtime_error("WeightOverflow: |tau*phi| = " + std::to_string(tau * phi_scale) +
                           " exceeds exp() range guard") {}
};

struct SearchExhausted : std::runtime_error {
  explicit SearchExhausted(const std::string& what) : std::runtime_error("SearchExhausted: " + what) {}
};

struct NonConvergence : std::runtime_error {
  explicit NonConvergence(const std::string& what) : std::runtime_error("NonConvergence: " + what) {}
};

struct DegenerateSolution : std::runtime_error {
  explicit DegenerateSolution(const std::string& what)
      : std::runtime_error("DegenerateSolution: " + what) {}
};

struct PlateauNotFound : std::runtime_error {
  explicit PlateauNotFound(const std::string& what)
      : std::runtime_error("PlateauNotFound: " + what) {}
};

}  // namespace carleman
