#include "carleman/config.hpp"
#include "carleman/runner.hpp"
#include "carleman/types.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct FlagSet {
  std::optional<std::string> config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
};

void add_option(CLI::App& app, FlagSet& flags, const std::string& key, const std::string& flag,
                const std::string& help) {
  app.add_option_function<std::string>(
         flag, [&flags, key](const std::string& v) { flags.overrides.emplace_back(key, v); }, help)
      ->expected(1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"carleman: numerical verification of weighted elliptic inequalities"};
  app.require_subcommand(1);

  FlagSet flags;
  std::vector<CLI::App*> subs;
  for (const char* name : {"validate", "certify", "mu-search", "rellich", "carleman-sweep",
                           "solve", "three-sphere", "suite"})
    subs.push_back(app.add_subcommand(name));

  for (CLI::App* sub : subs) {
    sub->add_option_function<std::string>(
        "--config", [&flags](const std::string& v) { flags.config_path = v; },
        "flat key = value config file");
    add_option(*sub, flags, "out_dir", "--out", "output directory for report.json and CSVs");
    add_option(*sub, flags, "seed", "--seed", "64-bit seed recorded in the report");
    add_option(*sub, flags, "threads", "--threads", "worker cap (0 = hardware)");
    add_option(*sub, flags, "grid_n", "--grid-n", "points per axis");
    add_option(*sub, flags, "dim", "--dim", "space dimension (2 or 3)");
    add_option(*sub, flags, "metric", "--metric", "metric spec (identity, diag:..., ...)");
    add_option(*sub, flags, "psi", "--psi", "weight recipe spec");
    add_option(*sub, flags, "mu", "--mu", "weight exponent mu");
    add_option(*sub, flags, "mu_max", "--mu-max", "search ceiling for mu");
    add_option(*sub, flags, "mask", "--mask", "domain mask (ball:R or annulus:a,b)");
    add_option(*sub, flags, "extent", "--extent", "grid half-extent L");
    add_option(*sub, flags, "tau_min", "--tau-min", "sweep lower tau");
    add_option(*sub, flags, "tau_max", "--tau-max", "sweep upper tau");
    add_option(*sub, flags, "n_tau", "--n-tau", "sweep grid size");
    add_option(*sub, flags, "r0", "--r0", "inner ball radius");
    add_option(*sub, flags, "rho", "--rho", "middle ball radius");
    add_option(*sub, flags, "mu0", "--mu0", "override certificate mu0");
    add_option(*sub, flags, "k_max", "--k-max", "harmonic family degree cap");
    add_option(*sub, flags, "exact", "--exact", "exact/manufactured solution expression");
    add_option(*sub, flags, "boundary", "--boundary", "Dirichlet data expression");
    add_option(*sub, flags, "a_expr", "--a", "zeroth-order coefficient expression");
    add_option(*sub, flags, "b_expr", "--b", "drift components joined by ';'");
    add_option(*sub, flags, "margin", "--margin", "certification margin (default 0)");
    add_option(*sub, flags, "c_declared", "--c-declared", "declared three-sphere constant");
    add_option(*sub, flags, "write_fields", "--write-fields", "dump solution fields (true/false)");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    carleman::RunConfig cfg;
    if (flags.config_path) cfg = carleman::parse_config_file(*flags.config_path);
    cfg.command = app.get_subcommands().front()->get_name();
    for (const auto& [key, value] : flags.overrides)
      carleman::apply_override(cfg, key, value);

    carleman::ReportBundle bundle = carleman::run(cfg);
    std::cout << "command:   " << cfg.command << "\n"
              << "status:    " << (bundle.exit_code == 0 ? "pass" : "FAIL") << "\n"
              << "hash:      " << bundle.content_hash << "\n"
              << "elapsed:   " << bundle.elapsed_seconds << " s\n"
              << "artifacts: " << cfg.out_dir << "/report.json\n";
    return bundle.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
