#include "carleman/sampling.hpp"

#include "carleman/rng.hpp"

#include <cmath>

namespace carleman {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::vector<Point> annulus_samples(int dim, double r_in, double r_out, int n_r, int n_angle) {
  if (dim < 2 || dim > 3) throw InvalidInput("annulus_samples: dim must be 2 or 3");
  if (!(0.0 <= r_in && r_in < r_out)) throw InvalidInput("annulus_samples: need 0 <= r_in < r_out");
  if (n_r < 2 || n_angle < 4) throw InvalidInput("annulus_samples: resolution too small");

  std::vector<double> radii(n_r);
  for (int i = 0; i < n_r; ++i) radii[i] = r_in + (r_out - r_in) * i / (n_r - 1);
  if (r_in == 0.0) radii[0] = (r_out - r_in) / (2.0 * (n_r - 1));  // skip the origin

  std::vector<Point> pts;
  if (dim == 2) {
    pts.reserve(static_cast<std::size_t>(n_r) * n_angle);
    for (double r : radii)
      for (int a = 0; a < n_angle; ++a) {
        const double th = 2.0 * kPi * a / n_angle;
        Point x(2);
        x << r * std::cos(th), r * std::sin(th);
        pts.push_back(x);
      }
    return pts;
  }
  const int n_lat = std::max(3, n_angle / 2);
  pts.reserve(static_cast<std::size_t>(n_r) * n_angle * n_lat);
  for (double r : radii)
    for (int l = 0; l < n_lat; ++l) {
      // latitudes strictly inside (0, pi) avoid duplicated poles
      const double ph = kPi * (l + 0.5) / n_lat;
      for (int a = 0; a < n_angle; ++a) {
        const double th = 2.0 * kPi * a / n_angle;
        Point x(3);
        x << r * std::sin(ph) * std::cos(th), r * std::sin(ph) * std::sin(th), r * std::cos(ph);
        pts.push_back(x);
      }
    }
  return pts;
}

std::vector<Point> ball_samples(int dim, double radius, int n_r, int n_angle) {
  return annulus_samples(dim, 0.0, radius, n_r, n_angle);
}

std::vector<Point> random_annulus_samples(int dim, double r_in, double r_out, int count,
                                          std::uint64_t seed) {
  if (dim < 2) throw InvalidInput("random_annulus_samples: dim must be >= 2");
  std::mt19937_64 rng(seed);
  std::vector<Point> pts;
  pts.reserve(count);
  while (static_cast<int>(pts.size()) < count) {
    Point x(dim);
    for (int i = 0; i < dim; ++i) x[i] = uniform(rng, -r_out, r_out);
    const double r = x.norm();
    if (r >= r_in && r <= r_out) pts.push_back(x);
  }
  return pts;
}

std::vector<std::pair<Point, Point>> sample_pairs(const std::vector<Point>& samples,
                                                  double separation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<Point, Point>> pairs;
  pairs.reserve(samples.size());
  for (const Point& x : samples) {
    Point d(x.size());
    for (int i = 0; i < x.size(); ++i) d[i] = uniform(rng, -1.0, 1.0);
    if (d.norm() == 0.0) d[0] = 1.0;
    pairs.emplace_back(x, Point(x + separation * d / d.norm()));
  }
  return pairs;
}

}  // namespace carleman
