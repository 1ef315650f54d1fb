#include "carleman/fields.hpp"
#include "carleman/rng.hpp"
#include "carleman/sampling.hpp"

#include <doctest.h>

#include <cmath>

using namespace carleman;

namespace {

Point pt(double a, double b) {
  Point x(2);
  x << a, b;
  return x;
}

// non-diagonal, non-constant test metric with analytic derivatives
MetricField wavy_metric() {
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

}  // namespace

TEST_CASE("metric_eval: constant identity metric") {
  MetricField m = make_metric("identity", 2);
  MetricEval me = metric_eval(m, pt(0.3, -0.7));
  CHECK((me.g - Mat::Identity(2, 2)).norm() == 0.0);
  CHECK((me.g_inv - Mat::Identity(2, 2)).norm() < 1e-14);
  CHECK(me.dg[0].norm() == 0.0);
  CHECK(me.dg[1].norm() == 0.0);
}

TEST_CASE("metric_eval: diagonal inverse") {
  MetricField m = make_metric("diag:2,0.5", 2);
  MetricEval me = metric_eval(m, pt(1, 1));
  CHECK(me.g_inv(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(me.g_inv(1, 1) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("metric_eval: sin-perturbed analytic derivative") {
  MetricField m = make_metric("sin-perturbed:0.1", 2);
  MetricEval me = metric_eval(m, pt(0, 0));
  CHECK(me.dg[0](0, 0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(me.dg[1].norm() == 0.0);
}

TEST_CASE("metric_eval: inverse consistency and derivative-of-inverse identity") {
  MetricField m = wavy_metric();
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const Point x = pt(uniform(rng, -1, 1), uniform(rng, -1, 1));
    MetricEval me = metric_eval(m, x);
    CHECK((me.g * me.g_inv - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);

    // d g^{ik} = -g^{ij} (d g_jh) g^{hk} vs central differences of the inverse
    for (int s = 0; s < 2; ++s) {
      const double h = 1e-5;
      Point xp = x, xm = x;
      xp[s] += h;
      xm[s] -= h;
      Mat fd = (metric_eval(m, xp).g_inv - metric_eval(m, xm).g_inv) / (2 * h);
      CHECK((fd - me.dg_inv[s]).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("metric_eval: degenerate metric reported with location") {
  MetricField bad;
  bad.dim = 2;
  bad.eval = [](const Point& x) {
    Mat g(2, 2);
    g << x[0], 0, 0, 1;  // loses SPD at x1 <= 0
    return g;
  };
  CHECK_THROWS_AS(metric_eval(bad, pt(-1, 0)), DegenerateMetric);
  CHECK_NOTHROW(metric_eval(bad, pt(1, 0)));
}

TEST_CASE("validate_bounds: identity and diagonal oracles") {
  std::vector<Point> samples = annulus_samples(2, 0.5, 1.0, 8, 16);
  auto pairs = sample_pairs(samples, 0.01, 11);

  EllipticityReport rep = validate_bounds(make_metric("identity", 2), samples, pairs);
  CHECK(rep.lambda_emp == doctest::Approx(1.0));
  CHECK(rep.Lambda_emp == doctest::Approx(0.0));
  CHECK(rep.pass_lambda);
  CHECK(rep.pass_Lambda);

  rep = validate_bounds(make_metric("diag:2,0.5", 2), samples, pairs);
  CHECK(rep.lambda_emp == doctest::Approx(2.0));  // extreme eigenvalues 2 and 1/2

  CHECK_THROWS_AS(validate_bounds(make_metric("identity", 2), {}, {}), InvalidInput);
}

TEST_CASE("validate_bounds: sin-perturbed lambda on [-1,1]^2") {
  // extreme of 1 + 0.1 sin: smallest eigenvalue 0.9 at x1 = -pi/2... but on
  // [-1,1] the extremes are sin(+-1); sample a line through x1 in [-1, 1]
  std::vector<Point> samples;
  for (int i = 0; i <= 200; ++i) samples.push_back(pt(-1.0 + i / 100.0, 0.0));
  EllipticityReport rep = validate_bounds(make_metric("sin-perturbed:0.1", 2), samples, {});
  const double expected = 1.0 / (1.0 - 0.1 * std::sin(1.0));
  CHECK(rep.lambda_emp == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("g_gradient: oracles and structure") {
  MetricField id = make_metric("identity", 2);
  Vec v = g_gradient(id, pt(0, 0), pt(1, 2));
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(2.0));

  MetricField d41 = make_metric("diag:4,1", 2);
  Vec w = g_gradient(d41, pt(0, 0), pt(1, 0));
  CHECK(w[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(w[1] == 0.0);
  // |grad_g|^2_g = g_ij (grad_g)_i (grad_g)_j = 4 * (1/16)
  const double norm2 = 4.0 * w[0] * w[0] + 1.0 * w[1] * w[1];
  CHECK(norm2 == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("g_gradient: bilinearity") {
  // exact on disjoint-support components with power-of-two scalars
  MetricField d = make_metric("diag:4,1", 2);
  const Point x = pt(0.2, 0.1);
  Vec a = g_gradient(d, x, pt(1.25, 0.0));
  Vec b = g_gradient(d, x, pt(0.0, -0.75));
  Vec combo = g_gradient(d, x, pt(2.0 * 1.25, 0.5 * -0.75));
  CHECK(combo[0] == 2.0 * a[0]);
  CHECK(combo[1] == 0.5 * b[1]);

  // general metric: linear to rounding
  MetricField m = wavy_metric();
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const Point y = pt(uniform(rng, -1, 1), uniform(rng, -1, 1));
    Vec u = pt(uniform(rng, -2, 2), uniform(rng, -2, 2));
    Vec v2 = pt(uniform(rng, -2, 2), uniform(rng, -2, 2));
    const double al = uniform(rng, -2, 2), be = uniform(rng, -2, 2);
    Vec lhs = g_gradient(m, y, al * u + be * v2);
    Vec rhs = al * g_gradient(m, y, u) + be * g_gradient(m, y, v2);
    CHECK((lhs - rhs).norm() <= 1e-13 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("exp_weight: hand values of the chain rule") {
  // psi = x1, mu = 1 at x = 0
  WeightRecipe lin = make_recipe("linear:1,0", 2, 1.0);
  WeightFunction phi = exp_weight(lin);
  CHECK(phi.eval(pt(0, 0)) == doctest::Approx(1.0));
  CHECK(phi.grad(pt(0, 0))[0] == doctest::Approx(1.0));
  CHECK(phi.grad(pt(0, 0))[1] == 0.0);
  Mat h = phi.hess(pt(0, 0));
  CHECK(h(0, 0) == doctest::Approx(1.0));
  CHECK(h(0, 1) == 0.0);
  CHECK(h(1, 1) == 0.0);

  // psi = -|x|^2, mu = 1 at (1, 0)
  WeightFunction w = exp_weight(make_recipe("neg-abs2", 2, 1.0));
  const double e1 = std::exp(-1.0);
  CHECK(w.grad(pt(1, 0))[0] == doctest::Approx(-2.0 * e1).epsilon(1e-14));
  CHECK(w.grad(pt(1, 0))[1] == 0.0);
  Mat hw = w.hess(pt(1, 0));
  CHECK(hw(0, 0) == doctest::Approx(2.0 * e1).epsilon(1e-14));   // (-2 + 4) e^{-1}
  CHECK(hw(1, 1) == doctest::Approx(-2.0 * e1).epsilon(1e-14));

  // phi = 1 where psi = 0 regardless of mu
  for (double mu : {0.5, 3.0, 17.0})
    CHECK(exp_weight(make_recipe("neg-abs2", 2, mu)).eval(pt(0, 0)) == 1.0);
}

TEST_CASE("exp_weight: error paths") {
  WeightRecipe r = make_recipe("neg-abs2", 2, 1.0);
  r.mu = 0.0;
  CHECK_THROWS_AS(exp_weight(r), InvalidInput);
  r.mu = -2.0;
  CHECK_THROWS_AS(exp_weight(r), InvalidInput);

  // |grad psi| = 0 at the origin -> ZeroGradient when sampled there
  WeightRecipe ok = make_recipe("neg-abs2", 2, 1.0);
  std::vector<Point> with_origin = {pt(0, 0), pt(1, 0)};
  CHECK_THROWS_AS(exp_weight(ok, with_origin), ZeroGradient);
}

TEST_CASE("exp_weight: analytic gradient matches finite differences at order 2") {
  WeightFunction phi = exp_weight(make_recipe("neg-abs2", 2, 3.0));
  const Point x = pt(0.6, -0.3);
  auto fd_err = [&](double h) {
    double worst = 0.0;
    for (int d = 0; d < 2; ++d) {
      Point xp = x, xm = x;
      xp[d] += h;
      xm[d] -= h;
      const double fd = (phi.eval(xp) - phi.eval(xm)) / (2 * h);
      worst = std::max(worst, std::abs(fd - phi.grad(x)[d]));
    }
    return worst;
  };
  const double e1 = fd_err(1e-3), e2 = fd_err(5e-4);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));  // O(h^2)
}

TEST_CASE("weight_bounds: oracles") {
  std::vector<Point> line;
  for (int i = 0; i <= 100; ++i) line.push_back(pt(-1.0 + i / 50.0, 0.5));

  // phi = x1 has |grad| = 1 everywhere
  WeightFunction lin = make_weight("expr:x1", 2);
  CHECK(weight_bounds(lin, line).m_emp == doctest::Approx(1.0));

  // phi = e^{-|x|^2} on the annulus 1/2 <= |x| <= 1: |grad| = 2 r e^{-r^2}
  // minimized at r = 1 with value 2/e
  WeightFunction gauss = exp_weight(make_recipe("neg-abs2", 2, 1.0));
  std::vector<Point> ann = annulus_samples(2, 0.5, 1.0, 64, 32);
  WeightBounds wb = weight_bounds(gauss, ann);
  CHECK(wb.m_emp == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(wb.worst_point.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!wb.zero_gradient);

  // constant weight: flagged, not thrown
  WeightFunction flat = make_weight("expr:2", 2);
  WeightBounds fb = weight_bounds(flat, line);
  CHECK(fb.m_emp == 0.0);
  CHECK(fb.zero_gradient);
}

TEST_CASE("weight hessian symmetric") {
  WeightFunction w = exp_weight(make_recipe("expr:-(x1^2) - 2*x2^2 + x1*x2", 2, 2.0));
  Mat h = w.hess(pt(0.4, 0.8));
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * h.cwiseAbs().maxCoeff());
}

TEST_CASE("catalog: bad specs rejected") {
  CHECK_THROWS_AS(make_metric("unknown-metric", 2), InvalidInput);
  CHECK_THROWS_AS(make_metric("diag:1", 2), InvalidInput);           // needs dim entries
  CHECK_THROWS_AS(make_metric("sin-perturbed:1.5", 2), InvalidInput);
  CHECK_THROWS_AS(make_recipe("nope", 2, 1.0), InvalidInput);
  CHECK_THROWS_AS(make_recipe("linear:0,0", 2, 1.0), InvalidInput);  // zero direction
}

TEST_CASE("laplace_g_weight: hand value for radial weight, identity metric") {
  // phi = e^{-|x|^2}: Lap phi = (4 r^2 - 4) e^{-r^2} in 2D
  WeightFunction w = exp_weight(make_recipe("neg-abs2", 2, 1.0));
  MetricField id = make_metric("identity", 2);
  const Point x = pt(0.8, 0.3);
  const double r2 = x.squaredNorm();
  CHECK(laplace_g_weight(id, w, x) ==
        doctest::Approx((4.0 * r2 - 4.0) * std::exp(-r2)).epsilon(1e-12));
}
