#pragma once

#include "carleman/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace carleman {

struct RunConfig {
  std::string command = "suite";

  // fields
  int dim = 2;
  std::string metric = "identity";
  std::string psi = "neg-abs2";
  double mu = 8.0;
  double mu_max = 4096.0;
  std::string phi_expr;  // optional direct weight expression

  // domain / grid
  std::string mask = "annulus:0.5,1";
  double extent = 1.0;  // half-extent L
  int grid_n = 129;

  // certification sampling
  int samples_r = 48;
  int samples_angle = 96;
  double margin = 0.0;

  // carleman sweep
  double tau_min = 1.0;
  double tau_max = 256.0;
  int n_tau = 17;
  int n_test_functions = 20;
  double tau_h_rule = 1.0;

  // solver
  std::string a_expr;
  std::string b_expr;      // per-component expressions joined by ';'
  std::string boundary;    // Dirichlet data expression
  std::string exact;       // manufactured / analytic solution expression
  double solve_tol = 1e-10;
  int max_iter = 20000;

  // three-sphere
  double r0 = 0.25;
  double rho = 0.4;
  double mu0 = 0.0;  // 0 = take from the certificate
  int k_max = 6;
  double c_declared = 0.0;  // 0 = report only

  // misc
  std::uint64_t seed = 42;
  int threads = 0;
  std::string out_dir = "out";
  bool write_fields = false;

  void validate() const;  // range guards; throws InvalidInput
};

// Flat key = value file (TOML subset: comments with '#', bare/quoted strings,
// numbers, booleans). Unknown keys are rejected with a suggestion.
RunConfig parse_config_file(const std::string& path);

// Applies "key=value" overrides (flags win over the file).
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

const std::vector<std::string>& known_config_keys();
std::string suggest_key(const std::string& unknown);

}  // namespace carleman
