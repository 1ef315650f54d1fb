#include "carleman/three_sphere.hpp"

#include "carleman/rng.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace carleman;
using carleman::testing::pt2;

namespace {
constexpr double kPi = 3.14159265358979323846;

ScalarField harmonic_mode(GridPtr g, int k) {
  return ScalarField::from_function(g, [k](const Point& x) {
    return std::pow(x.norm(), k) * std::cos(k * std::atan2(x[1], x[0]));
  });
}
}  // namespace

TEST_CASE("ball_norm: constants and harmonic modes") {
  GridPtr g = make_grid(2, 1.0, 129, MaskSpec::ball(1.0));
  ScalarField one = ScalarField::from_function(g, [](const Point&) { return 1.0; });
  CHECK(ball_norm(one, 0.5) == doctest::Approx(std::sqrt(kPi) / 2.0).epsilon(0.01));

  // ||r^k cos k theta||_{L^2(B_1)} = sqrt(pi / (2k+2)); k = 1 -> sqrt(pi/4)
  ScalarField u1 = harmonic_mode(g, 1);
  CHECK(ball_norm(u1, 1.0) == doctest::Approx(std::sqrt(kPi / 4.0)).epsilon(0.01));

  // monotone in the radius
  CHECK(ball_norm(u1, 0.3) <= ball_norm(u1, 0.6));
  CHECK(ball_norm(u1, 0.6) <= ball_norm(u1, 1.0));

  CHECK_THROWS_AS(ball_norm(u1, 1.5), InvalidInput);
}

TEST_CASE("theta_exponent: frozen hand value and limits") {
  // r0 = 1/4, rho = 0.4, mu0 = 8: (e^{-1.28} - e^{-2}) / (e^{-0.03125} - e^{-2})
  const double theta = theta_exponent(0.25, 0.4, 8.0);
  CHECK(std::abs(theta - 0.17112) <= 1e-5);
  CHECK(theta > 0.0);
  CHECK(theta < 1.0);

  // rho -> 1/2 pushes theta to 0+
  CHECK(theta_exponent(0.25, 0.4999, 8.0) < 5e-4);

  // strictly decreasing in rho on the proof range
  double prev = 1.0;
  for (double rho : {0.2, 0.3, 0.4, 0.45}) {
    const double t = theta_exponent(0.25, rho, 8.0);
    CHECK(t < prev);
    prev = t;
  }

  CHECK_THROWS_AS(theta_exponent(0.25, 0.6, 8.0), InvalidInput);   // above 1/2
  CHECK_THROWS_AS(theta_exponent(0.25, 0.1, 8.0), InvalidInput);   // below r0/2
}

TEST_CASE("tau_tilde: frozen hand values and homogeneity") {
  CHECK(tau_tilde(1.0, 1.0, 0.25, 8.0) == doctest::Approx(0.0));

  // norm ratio e^{1/2} (squared ratio e): tau = 1 / (2 (e^{-0.03125} - e^{-2}))
  const double denom = std::exp(-0.03125) - std::exp(-2.0);
  const double expect = 1.0 / (2.0 * denom);
  CHECK(tau_tilde(1.0, std::exp(0.5), 0.25, 8.0) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(0.59960).epsilon(1e-4));

  // squaring the norm ratio doubles tau
  const double t1 = tau_tilde(1.0, 3.0, 0.25, 8.0);
  const double t2 = tau_tilde(1.0, 9.0, 0.25, 8.0);
  CHECK(t2 == doctest::Approx(2.0 * t1).epsilon(1e-12));

  CHECK_THROWS_AS(tau_tilde(0.0, 1.0, 0.25, 8.0), DegenerateSolution);
}

TEST_CASE("three_sphere_check: harmonic-mode oracle C = (rho r0^{-theta})^{k+1}") {
  GridPtr g = make_grid(2, 1.0, 257, MaskSpec::ball(1.0));
  const double r0 = 0.25, rho = 0.4, mu0 = 8.0;
  const double theta = theta_exponent(r0, rho, mu0);

  for (int k : {1, 2, 3}) {
    ScalarField u = harmonic_mode(g, k);
    ThreeSphereReport rep = three_sphere_check(u, r0, rho, mu0);
    const double oracle = std::pow(rho * std::pow(r0, -theta), k + 1);
    CHECK(rep.C_emp == doctest::Approx(oracle).epsilon(0.02));
    CHECK(rep.theta == doctest::Approx(theta));
    CHECK(rep.branch == "unreported");
  }
}

TEST_CASE("three_sphere_check: scaling invariance and guards") {
  GridPtr g = make_grid(2, 1.0, 129, MaskSpec::ball(1.0));
  ScalarField u = harmonic_mode(g, 2);
  ThreeSphereReport base = three_sphere_check(u, 0.25, 0.4, 8.0);

  ScalarField ku = u;
  for (auto& v : ku.values) v *= 0.037;
  ThreeSphereReport scaled = three_sphere_check(ku, 0.25, 0.4, 8.0);
  CHECK(std::abs(scaled.C_emp - base.C_emp) <= 1e-12 * base.C_emp);

  ScalarField zero = ScalarField::zeros(g);
  CHECK_THROWS_AS(three_sphere_check(zero, 0.25, 0.4, 8.0), InvalidInput);

  // branch bookkeeping when tau_bar1 is provided
  ThreeSphereReport b1 = three_sphere_check(u, 0.25, 0.4, 8.0, 0.0, 1e9);
  CHECK(b1.branch == "tau_tilde<tau_bar1");
  ThreeSphereReport b2 = three_sphere_check(u, 0.25, 0.4, 8.0, 0.0, 1e-9);
  CHECK(b2.branch == "tau_tilde>=tau_bar1");
}

TEST_CASE("caccioppoli_ratio: constants and invariance") {
  GridPtr g = make_grid(2, 1.0, 129, MaskSpec::ball(1.0));
  MetricField id = make_metric("identity", 2);

  ScalarField c = ScalarField::from_function(g, [](const Point&) { return 2.0; });
  CaccioppoliReport rc = caccioppoli_ratio(id, c, {0.125, 0.25}, {0.0625, 0.5});
  CHECK(rc.ratio == doctest::Approx(0.0));
  CHECK(rc.r0 == doctest::Approx(0.5));

  // u = x1: |grad u|^2 = 1; analytic areas give the ratio
  ScalarField u = ScalarField::from_function(g, [](const Point& x) { return x[0]; });
  CaccioppoliReport ru = caccioppoli_ratio(id, u, {0.125, 0.25}, {0.0625, 0.5});
  const double lhs = kPi * (0.25 * 0.25 - 0.125 * 0.125);
  const double rhs = kPi / 4.0 * (std::pow(0.5, 4) - std::pow(0.0625, 4));
  CHECK(ru.lhs == doctest::Approx(lhs).epsilon(0.02));
  CHECK(ru.rhs_raw == doctest::Approx(rhs).epsilon(0.02));
  CHECK(ru.ratio == doctest::Approx(0.25 * lhs / rhs).epsilon(0.04));

  // invariance under u -> kappa u
  ScalarField ku = u;
  for (auto& v : ku.values) v *= -3.0;
  CaccioppoliReport rk = caccioppoli_ratio(id, ku, {0.125, 0.25}, {0.0625, 0.5});
  CHECK(rk.ratio == doctest::Approx(ru.ratio).epsilon(1e-12));

  CHECK_THROWS_AS(caccioppoli_ratio(id, u, {0.125, 0.25}, {0.2, 0.5}), InvalidInput);
  ScalarField z = ScalarField::zeros(g);
  CHECK_THROWS_AS(caccioppoli_ratio(id, z, {0.125, 0.25}, {0.0625, 0.5}), DegenerateSolution);
}

TEST_CASE("harmonic_family_experiment: norms, monotone C, resolution flags") {
  GridPtr g = make_grid(2, 1.0, 257, MaskSpec::ball(1.0));
  auto table = harmonic_family_experiment(6, 0.25, 0.4, 8.0, g);
  REQUIRE(table.size() == 6);

  CHECK(table[0].norm_1_analytic == doctest::Approx(std::sqrt(kPi / 4.0)));
  for (const auto& row : table) {
    CHECK(row.max_norm_rel_error <= 0.01);
    CHECK(row.C_emp_numeric ==
          doctest::Approx(row.C_emp_analytic).epsilon(0.02));
    CHECK(!row.under_resolved);
  }
  // C decreasing in k when rho < r0^theta
  for (std::size_t i = 1; i < table.size(); ++i)
    CHECK(table[i].C_emp_numeric < table[i - 1].C_emp_numeric);

  CHECK_THROWS_AS(harmonic_family_experiment(11, 0.25, 0.4, 8.0, g), InvalidInput);
  GridPtr g3 = make_grid(3, 1.0, 33, MaskSpec::ball(1.0));
  CHECK_THROWS_AS(harmonic_family_experiment(2, 0.25, 0.4, 8.0, g3), InvalidInput);
}
