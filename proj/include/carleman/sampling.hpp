#pragma once

#include "carleman/types.hpp"

#include <cstdint>
#include <vector>

namespace carleman {

// Polar / spherical product grids with both radial endpoints included, so
// extrema attained on the boundary circles are sampled exactly.
std::vector<Point> annulus_samples(int dim, double r_in, double r_out, int n_r, int n_angle);
std::vector<Point> ball_samples(int dim, double radius, int n_r, int n_angle);

// Seeded uniform draws from an annulus (rejection from the bounding box).
std::vector<Point> random_annulus_samples(int dim, double r_in, double r_out, int count,
                                          std::uint64_t seed);

// Nearby point pairs for Lipschitz difference quotients.
std::vector<std::pair<Point, Point>> sample_pairs(const std::vector<Point>& samples,
                                                  double separation, std::uint64_t seed);

}  // namespace carleman
