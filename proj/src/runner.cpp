#include "carleman/runner.hpp"

#include "carleman/conjugation.hpp"
#include "carleman/parallel.hpp"
#include "carleman/pseudoconvexity.hpp"
#include "carleman/rng.hpp"
#include "carleman/sampling.hpp"
#include "carleman/solver.hpp"
#include "carleman/three_sphere.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>

namespace carleman {

namespace {

MaskSpec parse_mask(const std::string& spec) {
  auto params = [&](std::size_t at) {
    std::vector<double> vals;
    std::string tail = spec.substr(at);
    std::size_t pos = 0;
    while (pos < tail.size()) {
      std::size_t next = tail.find(',', pos);
      if (next == std::string::npos) next = tail.size();
      vals.push_back(std::stod(tail.substr(pos, next - pos)));
      pos = next + 1;
    }
    return vals;
  };
  if (spec.rfind("ball:", 0) == 0) {
    auto v = params(5);
    if (v.size() != 1) throw InvalidInput("mask ball needs one radius");
    return MaskSpec::ball(v[0]);
  }
  if (spec.rfind("annulus:", 0) == 0) {
    auto v = params(8);
    if (v.size() != 2) throw InvalidInput("mask annulus needs r_in,r_out");
    return MaskSpec::annulus(v[0], v[1]);
  }
  throw InvalidInput("unknown mask spec \"" + spec + "\"");
}

std::vector<Point> certification_samples(const RunConfig& cfg, const MaskSpec& mask) {
  if (mask.kind == MaskKind::Ball)
    return ball_samples(cfg.dim, mask.r_out, cfg.samples_r, cfg.samples_angle);
  return annulus_samples(cfg.dim, mask.r_in, mask.r_out, cfg.samples_r, cfg.samples_angle);
}

WeightFunction build_weight(const RunConfig& cfg) {
  if (!cfg.phi_expr.empty())
    return weight_from_expression(Expression::parse(cfg.phi_expr, cfg.dim), cfg.phi_expr);
  return exp_weight(make_recipe(cfg.psi, cfg.dim, cfg.mu));
}

CoefficientField build_coeffs(const RunConfig& cfg) {
  CoefficientField c;
  double m1 = 0.0;
  if (!cfg.a_expr.empty()) {
    Expression e = Expression::parse(cfg.a_expr, cfg.dim);
    c.a = [e](const Point& x) { return e.eval(x); };
  }
  if (!cfg.b_expr.empty()) {
    std::vector<Expression> comps;
    std::size_t pos = 0;
    while (pos <= cfg.b_expr.size()) {
      std::size_t next = cfg.b_expr.find(';', pos);
      if (next == std::string::npos) next = cfg.b_expr.size();
      comps.push_back(Expression::parse(cfg.b_expr.substr(pos, next - pos), cfg.dim));
      pos = next + 1;
      if (next == cfg.b_expr.size()) break;
    }
    if (static_cast<int>(comps.size()) != cfg.dim)
      throw InvalidInput("b_expr needs dim components joined by ';'");
    c.b = [comps, n = cfg.dim](const Point& x) {
      Vec v(n);
      for (int d = 0; d < n; ++d) v[d] = comps[d].eval(x);
      return v;
    };
  }
  c.M1_bound = m1;
  return c;
}

std::vector<double> vec_to_std(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

struct StepResult {
  Json payload;
  int exit_code = 0;
  std::vector<std::pair<std::string, std::string>> csv_files;  // name -> content written later
};

// --- command implementations -------------------------------------------------

StepResult step_validate(const RunConfig& cfg) {
  MetricField metric = make_metric(cfg.metric, cfg.dim);
  MaskSpec mask = parse_mask(cfg.mask);
  std::vector<Point> samples = certification_samples(cfg, mask);
  std::vector<std::pair<Point, Point>> pairs = sample_pairs(samples, 0.01, cfg.seed);

  EllipticityReport rep = validate_bounds(metric, samples, pairs);
  Json j;
  j["lambda_emp"] = rep.lambda_emp;
  j["Lambda_emp"] = rep.Lambda_emp;
  j["lambda_declared"] = metric.lambda_bound;
  j["Lambda_declared"] = metric.Lambda_bound;
  j["pass_lambda"] = rep.pass_lambda;
  j["pass_Lambda"] = rep.pass_Lambda;
  j["n_samples"] = rep.n_samples;
  j["worst_point_lambda"] = vec_to_std(rep.worst_points[0]);

  bool pass_weight = true;
  try {
    WeightFunction phi = build_weight(cfg);
    WeightBounds wb = weight_bounds(phi, samples);
    j["min_grad_phi"] = wb.m_emp;
    j["M_emp"] = wb.M_emp;
    j["zero_gradient"] = wb.zero_gradient;
    pass_weight = !wb.zero_gradient;
  } catch (const InvalidInput&) {
    j["min_grad_phi"] = nullptr;  // no weight configured
  }

  StepResult out;
  out.payload = j;
  out.exit_code = (rep.pass_lambda && rep.pass_Lambda && pass_weight) ? 0 : 2;
  return out;
}

StepResult step_certify(const RunConfig& cfg) {
  MetricField metric = make_metric(cfg.metric, cfg.dim);
  WeightFunction phi = build_weight(cfg);
  MaskSpec mask = parse_mask(cfg.mask);
  std::vector<Point> samples = certification_samples(cfg, mask);

  PseudoconvexityCertificate cert = certify(metric, phi, samples, cfg.margin);
  StepResult out;
  out.payload["certificate"] = certificate_to_json(cert);
  if (cert.pass) {
    CrossCheckReport cc = characteristic_cross_check(metric, phi, cert, 2000, cfg.seed);
    out.payload["cross_check"] = {{"n_draws", cc.n_draws},
                                  {"violations", cc.violations},
                                  {"min_slack", cc.min_slack}};
    out.exit_code = cc.violations == 0 ? 0 : 2;
  } else {
    out.exit_code = 2;
  }
  return out;
}

StepResult step_mu_search(const RunConfig& cfg) {
  MetricField metric = make_metric(cfg.metric, cfg.dim);
  WeightRecipe recipe = make_recipe(cfg.psi, cfg.dim, 1.0);
  MaskSpec mask = parse_mask(cfg.mask);
  std::vector<Point> samples = certification_samples(cfg, mask);

  StepResult out;
  try {
    MuSearchResult res = mu_search(metric, recipe, samples, cfg.mu_max);
    out.payload["mu_min"] = res.mu_min;
    out.payload["certificate"] = certificate_to_json(res.certificate);
    Json trace = Json::array();
    for (auto& [mu, c0] : res.trace) trace.push_back({{"mu", mu}, {"c0", c0}});
    out.payload["trace"] = trace;
  } catch (const SearchExhausted& e) {
    out.payload["error"] = e.what();
    out.exit_code = 2;
  }
  return out;
}

StepResult step_rellich(const RunConfig& cfg) {
  MetricField metric = make_metric(cfg.metric, cfg.dim);
  MaskSpec mask = parse_mask(cfg.mask);

  VectorFieldB b_const;
  b_const.name = "constant";
  b_const.eval = [dim = cfg.dim](const Point&) {
    Vec v(dim);
    v.setZero();
    v[0] = 0.7;
    v[1] = -0.3;
    return v;
  };
  b_const.jacobian = [dim = cfg.dim](const Point&) { return Mat(Mat::Zero(dim, dim)); };

  VectorFieldB b_x;
  b_x.name = "identity-field";
  b_x.eval = [](const Point& x) { return Vec(x); };
  b_x.jacobian = [dim = cfg.dim](const Point&) { return Mat(Mat::Identity(dim, dim)); };

  StepResult out;
  Json cases = Json::array();
  bool all_pass = true;
  for (const VectorFieldB* B : {&b_const, &b_x}) {
    Json c;
    c["B"] = B->name;
    Json residuals = Json::array(), factors = Json::array();
    RellichResult prev;
    bool pass = true;
    int k = 0;
    for (int N : {65, 129, 257}) {
      GridPtr grid = make_grid(cfg.dim, cfg.extent, N, mask);
      std::vector<ScalarField> f = bump_corpus(grid, 1, 0, cfg.seed);
      const RellichResult res = rellich_residual(metric, *B, f.front());
      residuals.push_back(res.residual);
      if (k > 0) {
        const double factor = res.residual > 0.0 ? prev.residual / res.residual
                                                 : std::numeric_limits<double>::infinity();
        factors.push_back(factor);
        // a residual at the quadrature roundoff floor has already converged
        const bool at_floor = res.residual <= 1e-12 * std::max(1.0, res.abs_mass) &&
                              prev.residual <= 1e-12 * std::max(1.0, prev.abs_mass);
        if (!(factor >= 1.6) && !at_floor) pass = false;
      }
      prev = res;
      ++k;
    }
    c["residuals"] = residuals;
    c["reduction_factors"] = factors;
    c["pass"] = pass;
    all_pass = all_pass && pass;
    cases.push_back(c);
  }
  out.payload["cases"] = cases;
  out.exit_code = all_pass ? 0 : 2;
  return out;
}

StepResult step_sweep(const RunConfig& cfg) {
  MetricField metric = make_metric(cfg.metric, cfg.dim);
  WeightFunction phi = build_weight(cfg);
  MaskSpec mask = parse_mask(cfg.mask);

  StepResult out;
  PseudoconvexityCertificate cert =
      certify(metric, phi, certification_samples(cfg, mask), cfg.margin);
  out.payload["certificate"] = certificate_to_json(cert);
  if (!cert.pass) {
    out.exit_code = 2;
    return out;
  }

  GridPtr grid = make_grid(cfg.dim, cfg.extent, cfg.grid_n, mask);
  const int seeded = std::max(0, cfg.n_test_functions - 5);
  std::vector<ScalarField> corpus = bump_corpus(grid, std::min(5, cfg.n_test_functions), seeded,
                                                cfg.seed);
  try {
    TauSweepReport rep =
        tau_sweep(metric, phi, corpus, cfg.tau_min, cfg.tau_max, cfg.n_tau, cfg.tau_h_rule);
    out.payload["K_emp"] = rep.K_emp;
    out.payload["tau0_emp"] = rep.tau0_emp;
    out.payload["trusted_tau_max"] = rep.trusted_tau_max;
    out.payload["tau_grid"] = rep.tau_grid;
    Json ratios = Json::array();
    std::vector<std::vector<double>> csv_rows;
    for (std::size_t f = 0; f < rep.ratios.size(); ++f) {
      ratios.push_back(rep.ratios[f]);
      for (std::size_t j = 0; j < rep.tau_grid.size(); ++j)
        csv_rows.push_back({static_cast<double>(f), rep.tau_grid[j], rep.lhs[f][j], rep.rhs[f][j],
                            rep.ratios[f][j]});
    }
    out.payload["ratios"] = ratios;
    out.payload["seeds_recorded"] = cfg.seed;

    std::string csv = "function_id,tau,lhs,rhs,ratio\n";
    for (auto& row : csv_rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        csv += (i ? "," : "") + format_double(row[i]);
      csv += "\n";
    }
    out.csv_files.emplace_back("carleman_sweep.csv", csv);
  } catch (const PlateauNotFound& e) {
    out.payload["error"] = e.what();
    out.exit_code = 2;
  }
  return out;
}

StepResult step_solve(const RunConfig& cfg) {
  MetricField metric = make_metric(cfg.metric, cfg.dim);
  MaskSpec mask = parse_mask(cfg.mask);
  GridPtr grid = make_grid(cfg.dim, cfg.extent, cfg.grid_n, mask);
  CoefficientField coeffs = build_coeffs(cfg);

  StepResult out;
  if (!cfg.exact.empty()) {
    Expression exact = Expression::parse(cfg.exact, cfg.dim);
    std::vector<int> sizes;
    for (int N : {65, 129, 257})
      if (N <= cfg.grid_n) sizes.push_back(N);
    if (sizes.empty()) sizes.push_back(cfg.grid_n);
    auto table = manufactured_check(metric, coeffs, exact, sizes, cfg.extent, mask.r_out,
                                    std::min(cfg.solve_tol, 1e-12));
    Json rows = Json::array();
    std::string csv = "N,h,l2_error,observed_order\n";
    for (const auto& r : table) {
      rows.push_back({{"N", r.N}, {"h", r.h}, {"l2_error", r.l2_error},
                      {"observed_order", r.observed_order}});
      csv += std::to_string(r.N) + "," + format_double(r.h) + "," + format_double(r.l2_error) +
             "," + format_double(r.observed_order) + "\n";
    }
    out.payload["convergence"] = rows;
    out.csv_files.emplace_back("convergence.csv", csv);
    return out;
  }

  Expression bc = Expression::parse(cfg.boundary.empty() ? "0" : cfg.boundary, cfg.dim);
  LinearSystem sys = assemble(metric, coeffs, grid,
                              [&bc](const Point& x) { return bc.eval(x); });
  SolveReport rep = solve(sys, cfg.solve_tol, cfg.max_iter);
  out.payload["iterations"] = rep.iterations;
  out.payload["residual_norm"] = rep.residual_norm;
  out.payload["h"] = rep.h;
  out.payload["peclet"] = sys.peclet;
  out.payload["peclet_warning"] = sys.peclet_warning;
  if (cfg.write_fields) {
    field_to_csv(rep.solution, cfg.out_dir + "/solution.csv");
    field_to_binary(rep.solution, cfg.out_dir + "/solution.bin");
  }
  return out;
}

StepResult step_three_sphere(const RunConfig& cfg) {
  MetricField metric = make_metric(cfg.metric, cfg.dim);
  if (cfg.extent < 1.0) throw InvalidInput("three-sphere needs extent >= 1 (domain B_1)");
  GridPtr grid = make_grid(cfg.dim, cfg.extent, cfg.grid_n, MaskSpec::ball(1.0));

  StepResult out;
  double mu0 = cfg.mu0;
  if (!(mu0 > 0.0)) {
    // weight recipe of the localized estimate: exp(-mu |x|^2) certified on the
    // annulus B_1 \ B_{r0/8}
    WeightRecipe recipe = make_recipe("neg-abs2", cfg.dim, 1.0);
    std::vector<Point> samples =
        annulus_samples(cfg.dim, cfg.r0 / 8.0, 1.0, cfg.samples_r, cfg.samples_angle);
    MuSearchResult res = mu_search(make_metric(cfg.metric, cfg.dim), recipe, samples, cfg.mu_max);
    mu0 = res.mu_min;
    out.payload["certificate"] = certificate_to_json(res.certificate);
  }
  out.payload["mu0"] = mu0;

  bool pass = true;
  if (!cfg.exact.empty() || !cfg.boundary.empty()) {
    ScalarField u = ScalarField::zeros(grid);
    if (!cfg.exact.empty()) {
      Expression exact = Expression::parse(cfg.exact, cfg.dim);
      u = ScalarField::from_function(grid, [&exact](const Point& x) { return exact.eval(x); });
    } else {
      Expression bc = Expression::parse(cfg.boundary, cfg.dim);
      LinearSystem sys = assemble(metric, build_coeffs(cfg), grid,
                                  [&bc](const Point& x) { return bc.eval(x); });
      u = solve(sys, cfg.solve_tol, cfg.max_iter).solution;
    }
    ThreeSphereReport rep = three_sphere_check(u, cfg.r0, cfg.rho, mu0, cfg.c_declared);
    out.payload["three_sphere"] = {
        {"r0", rep.r0},         {"rho", rep.rho},       {"mu0", rep.mu0},
        {"theta", rep.theta},   {"tau_tilde", rep.tau_tilde},
        {"norm_r0", rep.norm_r0}, {"norm_rho", rep.norm_rho}, {"norm_1", rep.norm_1},
        {"C_emp", rep.C_emp},   {"branch", rep.branch}, {"pass", rep.pass}};
    CaccioppoliReport cac = caccioppoli_ratio(
        metric, u, {cfg.r0 / 4.0, cfg.r0 / 2.0}, {cfg.r0 / 8.0, cfg.r0});
    out.payload["caccioppoli"] = {{"lhs", cac.lhs}, {"rhs", cac.rhs_raw}, {"ratio", cac.ratio}};
    pass = rep.pass;
  } else {
    auto table = harmonic_family_experiment(cfg.k_max, cfg.r0, cfg.rho, mu0, grid);
    Json rows = Json::array();
    std::string csv = "k,norm_r0,norm_rho,norm_1,theta,C_emp_numeric,C_emp_analytic\n";
    double max_err = 0.0;
    for (const auto& r : table) {
      rows.push_back({{"k", r.k}, {"norm_r0", r.norm_r0}, {"norm_rho", r.norm_rho},
                      {"norm_1", r.norm_1}, {"theta", r.theta},
                      {"C_emp_numeric", r.C_emp_numeric}, {"C_emp_analytic", r.C_emp_analytic},
                      {"max_norm_rel_error", r.max_norm_rel_error},
                      {"under_resolved", r.under_resolved}});
      csv += std::to_string(r.k) + "," + format_double(r.norm_r0) + "," +
             format_double(r.norm_rho) + "," + format_double(r.norm_1) + "," +
             format_double(r.theta) + "," + format_double(r.C_emp_numeric) + "," +
             format_double(r.C_emp_analytic) + "\n";
      max_err = std::max(max_err, r.max_norm_rel_error);
      if (cfg.c_declared > 0.0 && r.C_emp_numeric > cfg.c_declared) pass = false;
    }
    out.payload["family"] = rows;
    out.payload["max_norm_rel_error"] = max_err;
    out.csv_files.emplace_back("three_sphere_family.csv", csv);
  }
  out.exit_code = pass ? 0 : 2;
  return out;
}

}  // namespace

Json config_echo(const RunConfig& cfg) {
  Json j;
  j["command"] = cfg.command;
  j["dim"] = cfg.dim;
  j["metric"] = cfg.metric;
  j["psi"] = cfg.psi;
  j["mu"] = cfg.mu;
  j["mu_max"] = cfg.mu_max;
  j["phi_expr"] = cfg.phi_expr;
  j["mask"] = cfg.mask;
  j["extent"] = cfg.extent;
  j["grid_n"] = cfg.grid_n;
  j["samples_r"] = cfg.samples_r;
  j["samples_angle"] = cfg.samples_angle;
  j["margin"] = cfg.margin;
  j["tau_min"] = cfg.tau_min;
  j["tau_max"] = cfg.tau_max;
  j["n_tau"] = cfg.n_tau;
  j["n_test_functions"] = cfg.n_test_functions;
  j["tau_h_rule"] = cfg.tau_h_rule;
  j["a_expr"] = cfg.a_expr;
  j["b_expr"] = cfg.b_expr;
  j["boundary"] = cfg.boundary;
  j["exact"] = cfg.exact;
  j["solve_tol"] = cfg.solve_tol;
  j["max_iter"] = cfg.max_iter;
  j["r0"] = cfg.r0;
  j["rho"] = cfg.rho;
  j["mu0"] = cfg.mu0;
  j["k_max"] = cfg.k_max;
  j["c_declared"] = cfg.c_declared;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["write_fields"] = cfg.write_fields;
  return j;
}

ReportBundle run(const RunConfig& cfg, bool write_artifacts) {
  cfg.validate();
  set_thread_budget(cfg.threads);
  if (write_artifacts && !cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  StepResult result;
  if (cfg.command == "validate") result = step_validate(cfg);
  else if (cfg.command == "certify") result = step_certify(cfg);
  else if (cfg.command == "mu-search") result = step_mu_search(cfg);
  else if (cfg.command == "rellich") result = step_rellich(cfg);
  else if (cfg.command == "carleman-sweep") result = step_sweep(cfg);
  else if (cfg.command == "solve") result = step_solve(cfg);
  else if (cfg.command == "three-sphere") result = step_three_sphere(cfg);
  else {
    // suite: certify -> carleman-sweep -> three-sphere, stop on first failure
    StepResult cert = step_certify(cfg);
    result.payload["certify"] = cert.payload;
    result.exit_code = cert.exit_code;
    if (cert.exit_code == 0) {
      StepResult sweep = step_sweep(cfg);
      result.payload["carleman_sweep"] = sweep.payload;
      result.exit_code = sweep.exit_code;
      for (auto& f : sweep.csv_files) result.csv_files.push_back(std::move(f));
      if (sweep.exit_code == 0) {
        StepResult ts = step_three_sphere(cfg);
        result.payload["three_sphere"] = ts.payload;
        result.exit_code = ts.exit_code;
        for (auto& f : ts.csv_files) result.csv_files.push_back(std::move(f));
      }
    }
  }

  ReportBundle bundle;
  bundle.payload = Json();
  bundle.payload["config"] = config_echo(cfg);
  bundle.payload["inputs_hash"] = sha256_hex(config_echo(cfg).dump());
  bundle.payload["result"] = result.payload;
  bundle.payload["status"] = result.exit_code;
  bundle.content_hash = sha256_hex(bundle.payload.dump());
  bundle.exit_code = result.exit_code;
  bundle.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (write_artifacts && !cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    Json on_disk = bundle.payload;
    on_disk["content_hash"] = bundle.content_hash;
    on_disk["timing_seconds"] = bundle.elapsed_seconds;  // outside the hashed payload
    write_text_file(cfg.out_dir + "/report.json", on_disk.dump(2) + "\n");
    for (auto& [name, content] : result.csv_files)
      write_text_file(cfg.out_dir + "/" + name, content);
  }
  return bundle;
}

}  // namespace carleman
