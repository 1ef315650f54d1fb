#include "carleman/pseudoconvexity.hpp"

#include "carleman/parallel.hpp"
#include "carleman/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace carleman {

namespace {

double g_dot(const Mat& g, const Vec& a, const Vec& b) { return a.dot(g * b); }

}  // namespace

namespace {

// Shared by the plain and scale-factored paths: grad/hess are the weight
// derivatives with any common positive scale already removed.
QPointData q_point_data_from(const MetricField& metric, const Point& x, const Vec& grad,
                             const Mat& hess) {
  MetricEval me = metric_eval(metric, x);
  const int n = metric.dim;

  QPointData d;
  d.g = me.g;
  d.g_inv = me.g_inv;
  d.grad_phi = grad;
  d.grad_g_phi = me.g_inv * grad;
  d.norm_g_phi = std::sqrt(std::max(0.0, d.grad_g_phi.dot(me.g * d.grad_g_phi)));
  if (d.norm_g_phi == 0.0) throw ZeroGradient(x);
  d.normal = d.grad_g_phi / d.norm_g_phi;

  // q(x,theta) = 4 d2phi[theta,theta]
  //              - 4 (ds g_kh) (grad_g phi)_k theta_h theta_s
  //              + 2 (ds g_tw) (grad_g phi)_s theta_t theta_w
  Mat T2 = Mat::Zero(n, n);
  Mat T3 = Mat::Zero(n, n);
  for (int s = 0; s < n; ++s) {
    const Mat& dgs = me.dg[s];
    T2.col(s) -= 4.0 * (dgs * d.grad_g_phi);  // row h: -4 sum_k dg[s](h,k) gphi_k
    T3 += 2.0 * d.grad_g_phi[s] * dgs;
  }
  d.q_matrix = 4.0 * hess + 0.5 * (T2 + T2.transpose()) + T3;
  return d;
}

}  // namespace

QPointData q_point_data(const MetricField& metric, const WeightFunction& phi, const Point& x) {
  return q_point_data_from(metric, x, phi.grad(x), phi.hess(x));
}

Vec normal_direction(const MetricField& metric, const WeightFunction& phi, const Point& x) {
  return q_point_data(metric, phi, x).normal;
}

double q_form(const MetricField& metric, const WeightFunction& phi, const Point& x,
              const Vec& theta) {
  QPointData d = q_point_data(metric, phi, x);
  return theta.dot(d.q_matrix * theta);
}

double Q_form(const MetricField& metric, const WeightFunction& phi, const Point& x, const Vec& xi,
              double tau) {
  // Literal term-by-term evaluation; kept independent of q_form so the
  // decomposition Q = q(xi_g) + tau^2 |grad_g phi|^2 q(N_g) is a real check.
  MetricEval me = metric_eval(metric, x);
  const int n = metric.dim;
  const Vec gphi = me.g_inv * phi.grad(x);
  const Vec xi_g = me.g_inv * xi;
  const Mat h = phi.hess(x);

  double out = 4.0 * (xi_g.dot(h * xi_g) + tau * tau * gphi.dot(h * gphi));
  for (int s = 0; s < n; ++s) {
    const Mat& dgs = me.dg[s];
    out -= 4.0 * gphi.dot(dgs * xi_g) * xi_g[s];
    out += 2.0 * xi_g.dot(dgs * xi_g) * gphi[s];
    out -= 2.0 * tau * tau * gphi.dot(dgs * gphi) * gphi[s];
  }
  return out;
}

std::complex<double> symbol(const MetricField& metric, const WeightFunction& phi, const Point& x,
                            const Vec& xi, double tau) {
  MetricEval me = metric_eval(metric, x);
  const Vec gphi = me.g_inv * phi.grad(x);
  const Vec xi_g = me.g_inv * xi;
  const double re = g_dot(me.g, xi_g, xi_g) - tau * tau * g_dot(me.g, gphi, gphi);
  const double im = 2.0 * tau * g_dot(me.g, xi_g, gphi);
  return {re, im};
}

namespace {

// g-orthonormal basis of the tangent subspace {t : <t, N>_g = 0}.
std::vector<Vec> tangent_basis(const Mat& g, const Vec& normal) {
  const int n = static_cast<int>(normal.size());
  std::vector<Vec> basis;
  for (int i = 0; i < n && static_cast<int>(basis.size()) < n - 1; ++i) {
    Vec b = Vec::Unit(n, i);
    for (int pass = 0; pass < 2; ++pass) {
      b -= g_dot(g, b, normal) * normal;
      for (const Vec& prev : basis) b -= g_dot(g, b, prev) * prev;
    }
    const double norm = std::sqrt(std::max(0.0, g_dot(g, b, b)));
    if (norm > 1e-10) basis.push_back(b / norm);
  }
  return basis;
}

}  // namespace

namespace {

TangentMin tangent_min_of(const QPointData& d, int dim, const Point& x) {
  std::vector<Vec> basis = tangent_basis(d.g, d.normal);
  if (static_cast<int>(basis.size()) != dim - 1)
    throw DegenerateMetric(x, "tangent basis construction failed");

  const int m = dim - 1;
  Mat a(m, m);
  for (int k = 0; k < m; ++k)
    for (int l = k; l < m; ++l) {
      a(k, l) = basis[k].dot(d.q_matrix * basis[l]);
      a(l, k) = a(k, l);
    }
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  TangentMin out;
  out.min_value = es.eigenvalues()[0];
  out.argmin = Vec::Zero(dim);
  for (int k = 0; k < m; ++k) out.argmin += es.eigenvectors().col(0)[k] * basis[k];
  return out;
}

}  // namespace

TangentMin tangent_min(const MetricField& metric, const WeightFunction& phi, const Point& x) {
  if (metric.dim < 2) throw InvalidInput("tangent_min: empty tangent space for dim < 2");
  return tangent_min_of(q_point_data(metric, phi, x), metric.dim, x);
}

namespace {

struct SampleEval {
  double value = std::numeric_limits<double>::infinity();  // c0(x) / exp(log_scale)
  double log_scale = 0.0;  // mu psi(x) on the factored path, 0 otherwise
  Vec tangent;
  std::optional<Point> zero_grad;

  int sign() const { return value > 0.0 ? 1 : value < 0.0 ? -1 : 0; }
  double log_mag() const { return log_scale + std::log(std::abs(value)); }
  // orders by the true value sign * exp(log_mag) without forming it
  bool less_than(const SampleEval& o) const {
    if (sign() != o.sign()) return sign() < o.sign();
    if (sign() > 0) return log_mag() < o.log_mag();
    if (sign() < 0) return log_mag() > o.log_mag();
    return false;
  }
};

PseudoconvexityCertificate certify_impl(
    const MetricField& metric, const std::vector<Point>& domain_samples, double margin,
    const std::string& weight_name,
    const std::function<QPointData(const Point&)>& point_data) {
  if (domain_samples.empty()) throw InvalidInput("certify: empty sample set");
  PseudoconvexityCertificate cert;
  cert.n_samples = static_cast<int>(domain_samples.size());
  cert.margin = margin;
  cert.metric_name = metric.name;
  cert.weight_name = weight_name;
  cert.samples = domain_samples;

  std::vector<SampleEval> slots(domain_samples.size());
  parallel_for(domain_samples.size(), [&](std::size_t i) {
    try {
      QPointData d = point_data(domain_samples[i]);
      TangentMin tm = tangent_min_of(d, metric.dim, domain_samples[i]);
      const double q_N = d.normal.dot(d.q_matrix * d.normal);
      slots[i].value = 0.5 * (tm.min_value + q_N);
      slots[i].log_scale = d.log_weight_scale;
      slots[i].tangent = tm.argmin;
    } catch (const ZeroGradient&) {
      slots[i].zero_grad = domain_samples[i];
    }
  });

  const SampleEval* best = nullptr;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].zero_grad) {
      cert.zero_gradient_hit = true;
      cert.zero_gradient_at = *slots[i].zero_grad;
      continue;
    }
    if (!best || slots[i].less_than(*best)) {
      best = &slots[i];
      cert.argmin_point = domain_samples[i];
      cert.argmin_tangent = slots[i].tangent;
    }
  }
  if (cert.zero_gradient_hit || !best) {
    cert.c0 = -std::numeric_limits<double>::infinity();
    cert.pass = false;
    return cert;
  }
  cert.c0 = best->log_scale == 0.0 ? best->value
                                   : best->value * std::exp(best->log_scale);
  if (best->sign() > 0) cert.c0_log = best->log_mag();
  cert.pass = best->sign() > 0 &&
              (margin <= 0.0 ? true : cert.c0_log > std::log(margin));
  return cert;
}

}  // namespace

PseudoconvexityCertificate certify(const MetricField& metric, const WeightFunction& phi,
                                   const std::vector<Point>& domain_samples, double margin) {
  return certify_impl(metric, domain_samples, margin, phi.name,
                      [&](const Point& x) { return q_point_data(metric, phi, x); });
}

PseudoconvexityCertificate certify_recipe(const MetricField& metric, const WeightRecipe& recipe,
                                          const std::vector<Point>& domain_samples,
                                          double margin) {
  if (!(recipe.mu > 0.0)) throw InvalidInput("certify_recipe: mu must be > 0");
  const double mu = recipe.mu;
  return certify_impl(
      metric, domain_samples, margin, "exp(" + std::to_string(mu) + "*" + recipe.name + ")",
      [&](const Point& x) {
        // derivatives of exp(mu psi) with the common exp factor removed
        const Vec dpsi = recipe.psi_grad(x);
        const Vec grad = mu * dpsi;
        const Mat hess = mu * recipe.psi_hess(x) + mu * mu * dpsi * dpsi.transpose();
        QPointData d = q_point_data_from(metric, x, grad, hess);
        d.log_weight_scale = mu * recipe.psi(x);
        return d;
      });
}

CrossCheckReport characteristic_cross_check(const MetricField& metric, const WeightFunction& phi,
                                            const PseudoconvexityCertificate& cert, int n_random,
                                            std::uint64_t seed) {
  if (!(cert.c0 > 0.0)) throw InvalidInput("characteristic_cross_check: certificate must pass");
  if (cert.samples.empty()) throw InvalidInput("characteristic_cross_check: certificate has no samples");

  std::mt19937_64 rng(seed);
  CrossCheckReport rep;
  rep.n_draws = n_random;
  rep.min_slack = std::numeric_limits<double>::infinity();
  const int n = metric.dim;

  for (int k = 0; k < n_random; ++k) {
    const Point& x = cert.samples[rng() % cert.samples.size()];
    QPointData d = q_point_data(metric, phi, x);

    // tangent direction with |xi_g| = |tau| |grad_g phi| (tau != 0 always:
    // on the characteristic set tau = 0 would force xi = 0, i.e. zeta = 0)
    Vec dir(n);
    double norm = 0.0;
    do {
      for (int i = 0; i < n; ++i) dir[i] = uniform(rng, -1.0, 1.0);
      dir -= g_dot(d.g, dir, d.normal) * d.normal;
      norm = std::sqrt(std::max(0.0, g_dot(d.g, dir, dir)));
    } while (norm < 1e-8);
    double tau = uniform(rng, 0.5, 2.0);
    if (rng() & 1u) tau = -tau;

    const Vec xi_g = dir * (std::abs(tau) * d.norm_g_phi / norm);
    const Vec xi = d.g * xi_g;
    const double lhs = Q_form(metric, phi, x, xi, tau);
    const double rhs =
        cert.c0 * (g_dot(d.g, xi_g, xi_g) + tau * tau * d.norm_g_phi * d.norm_g_phi);
    const double slack = lhs - rhs;
    rep.min_slack = std::min(rep.min_slack, slack);
    if (slack < -1e-9) ++rep.violations;
  }
  return rep;
}

MuSearchResult mu_search(const MetricField& metric, const WeightRecipe& recipe_without_mu,
                         const std::vector<Point>& domain_samples, double mu_max) {
  if (!(mu_max > 0.0)) throw InvalidInput("mu_search: mu_max must be > 0");
  MuSearchResult res;

  auto probe = [&](double mu) {
    WeightRecipe r = recipe_without_mu;
    r.mu = mu;
    PseudoconvexityCertificate cert = certify_recipe(metric, r, domain_samples);
    res.trace.emplace_back(mu, cert.c0);
    return cert;
  };

  double lo = 0.0, hi = 1.0;
  PseudoconvexityCertificate cert_hi = probe(1.0);
  if (cert_hi.pass) {
    res.mu_min = 1.0;
    res.certificate = cert_hi;
    return res;
  }
  while (!cert_hi.pass) {
    lo = hi;
    hi *= 2.0;
    if (hi > mu_max) {
      double best_mu = res.trace.front().first, best_c0 = res.trace.front().second;
      for (auto& [m, c] : res.trace)
        if (c > best_c0) { best_c0 = c; best_mu = m; }
      throw SearchExhausted("no passing mu <= " + std::to_string(mu_max) + "; best c0 = " +
                            std::to_string(best_c0) + " at mu = " + std::to_string(best_mu));
    }
    cert_hi = probe(hi);
  }
  for (int step = 0; step < 30; ++step) {
    const double mid = 0.5 * (lo + hi);
    PseudoconvexityCertificate cert_mid = probe(mid);
    if (cert_mid.pass) {
      hi = mid;
      cert_hi = cert_mid;
    } else {
      lo = mid;
    }
  }
  res.mu_min = hi;
  res.certificate = cert_hi;
  return res;
}

AlphaSelection alpha_select(const PseudoconvexityCertificate& cert, const MetricField& metric,
                            const WeightFunction& phi, const Point& x) {
  if (!(cert.c0 > 0.0)) throw InvalidInput("alpha_select: certificate must pass");
  QPointData d = q_point_data(metric, phi, x);
  AlphaSelection sel;
  sel.q_N = d.normal.dot(d.q_matrix * d.normal);
  sel.alpha_tilde = 0.5 * (3.0 * cert.c0 / 8.0 - sel.q_N);
  sel.gamma = sel.alpha_tilde - laplace_g_weight(metric, phi, x);
  sel.window_ok =
      (-sel.q_N / 2.0 < sel.alpha_tilde) && (sel.alpha_tilde < (cert.c0 - sel.q_N) / 2.0);
  const double band = sel.q_N + 2.0 * sel.alpha_tilde;
  sel.band_ok = (cert.c0 / 4.0 <= band + 1e-14) && (band <= cert.c0 / 2.0 + 1e-14);
  return sel;
}

double alpha_lipschitz(const PseudoconvexityCertificate& cert, const MetricField& metric,
                       const WeightFunction& phi, const std::vector<Point>& samples) {
  double c2 = 0.0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const double dist = (samples[i] - samples[i + 1]).norm();
    if (dist <= 0.0) continue;
    const double da = std::abs(alpha_select(cert, metric, phi, samples[i]).alpha_tilde -
                               alpha_select(cert, metric, phi, samples[i + 1]).alpha_tilde);
    c2 = std::max(c2, da / dist);
  }
  return c2;
}

double coupling_C1(const MetricField& metric, const WeightFunction& phi,
                   const std::vector<Point>& samples) {
  double c1 = 0.0;
  for (const Point& x : samples) {
    QPointData d = q_point_data(metric, phi, x);
    const Vec w = d.q_matrix * d.normal;
    c1 = std::max(c1, std::sqrt(std::max(0.0, w.dot(d.g_inv * w))));
  }
  return c1;
}

namespace {

Mat proof_matrix(double tau, double norm_g_phi2, double q_N, double alpha, double c0, double C1) {
  Mat m = Mat::Zero(3, 3);
  m(0, 0) = 4.0 * tau * norm_g_phi2 + q_N - 2.0 * alpha;
  m(0, 1) = m(1, 0) = -C1;
  m(1, 1) = c0 - q_N - 2.0 * alpha;
  m(2, 2) = q_N + 2.0 * alpha;
  return m;
}

}  // namespace

MinorReport minor_report(const PseudoconvexityCertificate& cert, const MetricField& metric,
                         const WeightFunction& phi, const Point& x, double tau, double C1,
                         double m_bound, const std::vector<Point>& samples) {
  MinorReport rep;
  rep.C1_emp = C1;
  rep.detM_lower = cert.c0 * cert.c0 * m_bound * m_bound / (2.0 * metric.lambda_bound);

  AlphaSelection sel = alpha_select(cert, metric, phi, x);
  QPointData d = q_point_data(metric, phi, x);
  rep.M_matrix =
      proof_matrix(tau, d.norm_g_phi * d.norm_g_phi, sel.q_N, sel.alpha_tilde, cert.c0, C1);
  rep.minors = Vec(3);
  rep.minors[0] = rep.M_matrix(0, 0);
  rep.minors[1] = rep.M_matrix(0, 0) * rep.M_matrix(1, 1) - C1 * C1;
  rep.minors[2] = rep.minors[1] * rep.M_matrix(2, 2);
  rep.positive_definite = rep.minors[0] > 0 && rep.minors[1] > 0 && rep.minors[2] > 0;

  rep.tau1_emp = std::numeric_limits<double>::infinity();
  if (!samples.empty()) {
    // det M is affine increasing in tau, so the geometric grid always crosses;
    // the conservative C1 can push the crossing to very large tau
    for (double t = 1.0 / 16.0; t <= 0x1p60; t *= 2.0) {
      bool all_ok = true;
      for (const Point& p : samples) {
        AlphaSelection s = alpha_select(cert, metric, phi, p);
        QPointData q = q_point_data(metric, phi, p);
        Mat m = proof_matrix(t, q.norm_g_phi * q.norm_g_phi, s.q_N, s.alpha_tilde, cert.c0, C1);
        const double det = (m(0, 0) * m(1, 1) - C1 * C1) * m(2, 2);
        if (!(det >= rep.detM_lower)) {
          all_ok = false;
          break;
        }
      }
      if (all_ok) {
        rep.tau1_emp = t;
        break;
      }
    }
  }
  return rep;
}

ProofDiagnostics tangential_split(const MetricField& metric, const WeightFunction& phi,
                                  const Point& x, const Vec& grad_v, double tau, double v_val) {
  QPointData d = q_point_data(metric, phi, x);
  const Vec grad_g_v = d.g_inv * grad_v;
  const double xn = g_dot(d.g, grad_g_v, d.normal);

  ProofDiagnostics out;
  out.T_g = grad_g_v - xn * d.normal;
  out.X = std::abs(xn);
  out.Y = std::sqrt(std::max(0.0, g_dot(d.g, out.T_g, out.T_g)));
  out.Z = tau * d.norm_g_phi * v_val;
  return out;
}

}  // namespace carleman
