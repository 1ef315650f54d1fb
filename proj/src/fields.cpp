#include "carleman/fields.hpp"

#include <cmath>
#include <limits>

namespace carleman {

namespace {

void check_symmetric(const Mat& g, const Point& x) {
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if (!g.allFinite()) throw InvalidInput("metric not finite at " + point_str(x));
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidInput("metric not symmetric at " + point_str(x));
}

std::vector<Mat> fd_metric_grad(const MetricField& metric, const Point& x) {
  const int n = metric.dim;
  std::vector<Mat> dg(n);
  Point xp = x, xm = x;
  for (int s = 0; s < n; ++s) {
    xp[s] = x[s] + kMetricFdStep;
    xm[s] = x[s] - kMetricFdStep;
    dg[s] = (metric.eval(xp) - metric.eval(xm)) / (2.0 * kMetricFdStep);
    xp[s] = x[s];
    xm[s] = x[s];
  }
  return dg;
}

}  // namespace

MetricEval metric_eval(const MetricField& metric, const Point& x) {
  if (!x.allFinite()) throw InvalidInput("metric_eval: point not finite");
  if (!metric.eval || metric.dim < 2) throw InvalidInput("metric_eval: malformed metric");
  MetricEval out;
  out.g = metric.eval(x);
  check_symmetric(out.g, x);

  Eigen::LLT<Mat> llt(out.g);
  if (llt.info() != Eigen::Success) throw DegenerateMetric(x);
  out.g_inv = llt.solve(Mat::Identity(metric.dim, metric.dim));

  out.dg = metric.grad_eval ? metric.grad_eval(x) : fd_metric_grad(metric, x);
  out.dg_inv.resize(metric.dim);
  for (int s = 0; s < metric.dim; ++s) out.dg_inv[s] = -out.g_inv * out.dg[s] * out.g_inv;
  return out;
}

EllipticityReport validate_bounds(const MetricField& metric, const std::vector<Point>& samples,
                                  const std::vector<std::pair<Point, Point>>& pairs) {
  if (samples.empty()) throw InvalidInput("validate_bounds: empty sample set");
  EllipticityReport rep;
  rep.n_samples = static_cast<int>(samples.size());
  rep.worst_points.resize(3, Point::Zero(metric.dim));

  for (const Point& x : samples) {
    Mat g = metric.eval(x);
    check_symmetric(g, x);
    Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0) throw DegenerateMetric(x);
    const double cand = std::max(hi, 1.0 / lo);
    if (cand > rep.lambda_emp) {
      rep.lambda_emp = cand;
      rep.worst_points[0] = x;
    }
  }
  for (const auto& [x, y] : pairs) {
    const double dist = (x - y).norm();
    if (dist <= 0.0) continue;
    const double quot = (metric.eval(x) - metric.eval(y)).cwiseAbs().sum() / dist;
    if (quot > rep.Lambda_emp) {
      rep.Lambda_emp = quot;
      rep.worst_points[1] = x;
    }
  }
  rep.pass_lambda = rep.lambda_emp <= metric.lambda_bound;
  rep.pass_Lambda = rep.Lambda_emp <= metric.Lambda_bound;
  return rep;
}

Vec g_gradient(const MetricField& metric, const Point& x, const Vec& euclid_grad) {
  return metric_eval(metric, x).g_inv * euclid_grad;
}

WeightFunction exp_weight(const WeightRecipe& recipe, const std::vector<Point>& samples) {
  if (!(recipe.mu > 0.0)) throw InvalidInput("exp_weight: mu must be > 0");
  if (!recipe.psi || !recipe.psi_grad || !recipe.psi_hess)
    throw InvalidInput("exp_weight: recipe needs psi with gradient and Hessian");

  const double mu = recipe.mu;
  auto psi = recipe.psi;
  auto psi_grad = recipe.psi_grad;
  auto psi_hess = recipe.psi_hess;

  WeightFunction phi;
  phi.dim = recipe.dim;
  phi.name = "exp(" + std::to_string(mu) + "*" + recipe.name + ")";
  phi.eval = [=](const Point& x) { return std::exp(mu * psi(x)); };
  phi.grad = [=](const Point& x) { return Vec(mu * psi_grad(x) * std::exp(mu * psi(x))); };
  phi.hess = [=](const Point& x) {
    const Vec dpsi = psi_grad(x);
    const Mat h = psi_hess(x);
    return Mat((mu * h + mu * mu * dpsi * dpsi.transpose()) * std::exp(mu * psi(x)));
  };

  if (!samples.empty()) {
    for (const Point& x : samples)
      if (psi_grad(x).norm() == 0.0) throw ZeroGradient(x);
    WeightBounds wb = weight_bounds(phi, samples);
    phi.m_bound = wb.m_emp;
    phi.M_bound = wb.M_emp;
  }
  return phi;
}

WeightBounds weight_bounds(const WeightFunction& phi, const std::vector<Point>& samples) {
  if (samples.empty()) throw InvalidInput("weight_bounds: empty sample set");
  WeightBounds wb;
  wb.m_emp = std::numeric_limits<double>::infinity();
  wb.worst_point = samples.front();
  for (const Point& x : samples) {
    const double gn = phi.grad(x).norm();
    if (gn < wb.m_emp) {
      wb.m_emp = gn;
      wb.worst_point = x;
    }
    double c2 = std::abs(phi.eval(x));
    c2 = std::max(c2, phi.grad(x).cwiseAbs().maxCoeff());
    c2 = std::max(c2, phi.hess(x).cwiseAbs().maxCoeff());
    wb.M_emp = std::max(wb.M_emp, c2);
  }
  wb.zero_gradient = wb.m_emp == 0.0;
  return wb;
}

double laplace_g_weight(const MetricField& metric, const WeightFunction& phi, const Point& x) {
  MetricEval me = metric_eval(metric, x);
  const Vec dphi = phi.grad(x);
  const Mat h = phi.hess(x);
  double out = (me.g_inv * h).trace();
  for (int i = 0; i < metric.dim; ++i) out += me.dg_inv[i].row(i).dot(dphi);
  return out;
}

// --- catalog ----------------------------------------------------------------

namespace {

std::vector<double> parse_params(const std::string& tail) {
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos < tail.size()) {
    std::size_t next = tail.find(',', pos);
    if (next == std::string::npos) next = tail.size();
    try {
      vals.push_back(std::stod(tail.substr(pos, next - pos)));
    } catch (...) {
      throw InvalidInput("bad numeric parameter in field spec \"" + tail + "\"");
    }
    pos = next + 1;
  }
  return vals;
}

MetricField diag_expr_metric(const std::string& tail, int dim) {
  std::vector<Expression> entries;
  std::size_t pos = 0;
  while (pos <= tail.size()) {
    std::size_t next = tail.find(';', pos);
    if (next == std::string::npos) next = tail.size();
    entries.push_back(Expression::parse(tail.substr(pos, next - pos), dim));
    pos = next + 1;
    if (next == tail.size()) break;
  }
  if (static_cast<int>(entries.size()) != dim)
    throw InvalidInput("diag-expr metric needs exactly dim entries");
  MetricField m;
  m.dim = dim;
  m.name = "diag-expr:" + tail;
  m.eval = [entries, dim](const Point& x) {
    Mat g = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) g(i, i) = entries[i].eval(x);
    return g;
  };
  std::vector<std::vector<Expression>> dentries(dim);
  for (int s = 0; s < dim; ++s)
    for (int i = 0; i < dim; ++i) dentries[s].push_back(entries[i].derivative(s));
  m.grad_eval = [dentries, dim](const Point& x) {
    std::vector<Mat> dg(dim, Mat::Zero(dim, dim));
    for (int s = 0; s < dim; ++s)
      for (int i = 0; i < dim; ++i) dg[s](i, i) = dentries[s][i].eval(x);
    return dg;
  };
  return m;
}

}  // namespace

MetricField make_metric(const std::string& spec, int dim) {
  if (dim < 2) throw InvalidInput("metric dim must be >= 2");
  MetricField m;
  m.dim = dim;
  m.name = spec;
  if (spec == "identity") {
    m.eval = [dim](const Point&) { return Mat::Identity(dim, dim); };
    m.grad_eval = [dim](const Point&) { return std::vector<Mat>(dim, Mat::Zero(dim, dim)); };
    m.lambda_bound = 1.0;
    m.Lambda_bound = 0.0;
    return m;
  }
  if (spec.rfind("diag:", 0) == 0) {
    auto vals = parse_params(spec.substr(5));
    if (static_cast<int>(vals.size()) != dim) throw InvalidInput("diag metric needs dim entries");
    Vec d = Eigen::Map<Vec>(vals.data(), dim);
    if (d.minCoeff() <= 0.0) throw InvalidInput("diag metric entries must be positive");
    m.eval = [d](const Point&) { return Mat(d.asDiagonal()); };
    m.grad_eval = [dim](const Point&) { return std::vector<Mat>(dim, Mat::Zero(dim, dim)); };
    m.lambda_bound = std::max(d.maxCoeff(), 1.0 / d.minCoeff());
    m.Lambda_bound = 0.0;
    return m;
  }
  if (spec.rfind("sin-perturbed:", 0) == 0) {
    auto vals = parse_params(spec.substr(14));
    if (vals.size() != 1 || vals[0] <= 0.0 || vals[0] >= 1.0)
      throw InvalidInput("sin-perturbed metric needs eps in (0,1)");
    const double eps = vals[0];
    m.eval = [dim, eps](const Point& x) {
      Mat g = Mat::Identity(dim, dim);
      g(0, 0) = 1.0 + eps * std::sin(x[0]);
      return g;
    };
    m.grad_eval = [dim, eps](const Point& x) {
      std::vector<Mat> dg(dim, Mat::Zero(dim, dim));
      dg[0](0, 0) = eps * std::cos(x[0]);
      return dg;
    };
    m.lambda_bound = 1.0 / (1.0 - eps);
    m.Lambda_bound = eps;
    return m;
  }
  if (spec.rfind("diag-expr:", 0) == 0) return diag_expr_metric(spec.substr(10), dim);
  throw InvalidInput("unknown metric spec \"" + spec + "\"");
}

WeightRecipe make_recipe(const std::string& spec, int dim, double mu) {
  WeightRecipe r;
  r.dim = dim;
  r.mu = mu;
  r.name = spec;
  if (spec == "neg-abs2") {
    r.psi = [](const Point& x) { return -x.squaredNorm(); };
    r.psi_grad = [](const Point& x) { return Vec(-2.0 * x); };
    r.psi_hess = [dim](const Point&) { return Mat(-2.0 * Mat::Identity(dim, dim)); };
    return r;
  }
  if (spec.rfind("linear:", 0) == 0) {
    auto vals = parse_params(spec.substr(7));
    if (static_cast<int>(vals.size()) != dim) throw InvalidInput("linear recipe needs dim entries");
    Vec d = Eigen::Map<Vec>(vals.data(), dim);
    if (d.norm() == 0.0) throw InvalidInput("linear recipe direction must be nonzero");
    r.psi = [d](const Point& x) { return d.dot(x); };
    r.psi_grad = [d](const Point&) { return d; };
    r.psi_hess = [dim](const Point&) { return Mat(Mat::Zero(dim, dim)); };
    return r;
  }
  if (spec.rfind("expr:", 0) == 0) {
    Expression e = Expression::parse(spec.substr(5), dim);
    r.psi = [e](const Point& x) { return e.eval(x); };
    r.psi_grad = [e](const Point& x) { return e.gradient(x); };
    r.psi_hess = [e](const Point& x) { return e.hessian(x); };
    return r;
  }
  throw InvalidInput("unknown recipe spec \"" + spec + "\"");
}

WeightFunction weight_from_expression(const Expression& e, const std::string& name) {
  WeightFunction w;
  w.dim = e.dim();
  w.name = name;
  w.eval = [e](const Point& x) { return e.eval(x); };
  w.grad = [e](const Point& x) { return e.gradient(x); };
  w.hess = [e](const Point& x) { return e.hessian(x); };
  return w;
}

WeightFunction make_weight(const std::string& spec, int dim) {
  if (spec.rfind("expr:", 0) == 0)
    return weight_from_expression(Expression::parse(spec.substr(5), dim), spec);
  throw InvalidInput("unknown weight spec \"" + spec + "\" (use expr:... or a recipe + mu)");
}

}  // namespace carleman
