#include "carleman/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

namespace carleman {

namespace {

struct KeyBinding {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
};

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (...) {
    throw InvalidInput("config key '" + key + "': bad numeric value \"" + v + "\"");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != static_cast<long long>(x))
    throw InvalidInput("config key '" + key + "': expected an integer, got \"" + v + "\"");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidInput("config key '" + key + "': expected true/false, got \"" + v + "\"");
}

const std::vector<KeyBinding>& bindings() {
  static const std::vector<KeyBinding> kBindings = {
      {"command", [](RunConfig& c, const std::string& v) { c.command = v; }},
      {"dim", [](RunConfig& c, const std::string& v) { c.dim = to_int("dim", v); }},
      {"metric", [](RunConfig& c, const std::string& v) { c.metric = v; }},
      {"psi", [](RunConfig& c, const std::string& v) { c.psi = v; }},
      {"mu", [](RunConfig& c, const std::string& v) { c.mu = to_double("mu", v); }},
      {"mu_max", [](RunConfig& c, const std::string& v) { c.mu_max = to_double("mu_max", v); }},
      {"phi_expr", [](RunConfig& c, const std::string& v) { c.phi_expr = v; }},
      {"mask", [](RunConfig& c, const std::string& v) { c.mask = v; }},
      {"extent", [](RunConfig& c, const std::string& v) { c.extent = to_double("extent", v); }},
      {"grid_n", [](RunConfig& c, const std::string& v) { c.grid_n = to_int("grid_n", v); }},
      {"samples_r",
       [](RunConfig& c, const std::string& v) { c.samples_r = to_int("samples_r", v); }},
      {"samples_angle",
       [](RunConfig& c, const std::string& v) { c.samples_angle = to_int("samples_angle", v); }},
      {"margin", [](RunConfig& c, const std::string& v) { c.margin = to_double("margin", v); }},
      {"tau_min", [](RunConfig& c, const std::string& v) { c.tau_min = to_double("tau_min", v); }},
      {"tau_max", [](RunConfig& c, const std::string& v) { c.tau_max = to_double("tau_max", v); }},
      {"n_tau", [](RunConfig& c, const std::string& v) { c.n_tau = to_int("n_tau", v); }},
      {"n_test_functions",
       [](RunConfig& c, const std::string& v) {
         c.n_test_functions = to_int("n_test_functions", v);
       }},
      {"tau_h_rule",
       [](RunConfig& c, const std::string& v) { c.tau_h_rule = to_double("tau_h_rule", v); }},
      {"a_expr", [](RunConfig& c, const std::string& v) { c.a_expr = v; }},
      {"b_expr", [](RunConfig& c, const std::string& v) { c.b_expr = v; }},
      {"boundary", [](RunConfig& c, const std::string& v) { c.boundary = v; }},
      {"exact", [](RunConfig& c, const std::string& v) { c.exact = v; }},
      {"solve_tol",
       [](RunConfig& c, const std::string& v) { c.solve_tol = to_double("solve_tol", v); }},
      {"max_iter", [](RunConfig& c, const std::string& v) { c.max_iter = to_int("max_iter", v); }},
      {"r0", [](RunConfig& c, const std::string& v) { c.r0 = to_double("r0", v); }},
      {"rho", [](RunConfig& c, const std::string& v) { c.rho = to_double("rho", v); }},
      {"mu0", [](RunConfig& c, const std::string& v) { c.mu0 = to_double("mu0", v); }},
      {"k_max", [](RunConfig& c, const std::string& v) { c.k_max = to_int("k_max", v); }},
      {"c_declared",
       [](RunConfig& c, const std::string& v) { c.c_declared = to_double("c_declared", v); }},
      {"seed",
       [](RunConfig& c, const std::string& v) {
         try {
           c.seed = std::stoull(v);
         } catch (...) {
           throw InvalidInput("config key 'seed': bad value \"" + v + "\"");
         }
       }},
      {"threads", [](RunConfig& c, const std::string& v) { c.threads = to_int("threads", v); }},
      {"out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
      {"write_fields",
       [](RunConfig& c, const std::string& v) { c.write_fields = to_bool("write_fields", v); }},
  };
  return kBindings;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> kKeys = [] {
    std::vector<std::string> keys;
    for (const auto& b : bindings()) keys.push_back(b.key);
    return keys;
  }();
  return kKeys;
}

std::string suggest_key(const std::string& unknown) {
  // prefix family first: "taus" -> "tau_min/tau_max"
  std::string stem = unknown;
  while (stem.size() >= 3) {
    std::vector<std::string> family;
    for (const auto& k : known_config_keys())
      if (k.rfind(stem, 0) == 0) family.push_back(k);
    if (!family.empty()) {
      std::string out;
      for (std::size_t i = 0; i < family.size(); ++i) out += (i ? "/" : "") + family[i];
      return out;
    }
    stem.pop_back();
  }
  std::string best;
  std::size_t best_d = 4;  // only suggest close matches
  for (const auto& k : known_config_keys()) {
    const std::size_t d = edit_distance(unknown, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& b : bindings())
    if (b.key == key) {
      b.set(cfg, value);
      return;
    }
  const std::string hint = suggest_key(key);
  throw InvalidInput("unknown config key '" + key + "'" +
                     (hint.empty() ? "" : "; did you mean \"" + hint + "\"?"));
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("config file not found: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    try {
      apply_override(cfg, key, value);
    } catch (const InvalidInput& e) {
      throw InvalidInput("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

void RunConfig::validate() const {
  static const std::vector<std::string> kCommands = {
      "validate", "certify",  "mu-search", "rellich",
      "carleman-sweep", "solve", "three-sphere", "suite"};
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw InvalidInput("unknown command '" + command + "'");
  if (dim < 2 || dim > 3) throw InvalidInput("dim must be 2 or 3");
  if (grid_n < 16) throw InvalidInput("grid_n must be >= 16");
  if (!(extent > 0.0)) throw InvalidInput("extent must be > 0");
  if (!(mu > 0.0)) throw InvalidInput("mu must be > 0");
  if (samples_r < 2 || samples_angle < 4) throw InvalidInput("certification sampling too coarse");
  if (!(tau_min > 0.0) || tau_max < tau_min) throw InvalidInput("bad tau range");
  if (n_tau < 1) throw InvalidInput("n_tau must be >= 1");
  if (command == "three-sphere" || command == "suite") {
    if (!(r0 > 0.0 && r0 < 1.0)) throw InvalidInput("r0 must be in (0, 1)");
    if (!(rho > r0 / 2.0 && rho < 0.5))
      throw InvalidInput("rho = " + std::to_string(rho) +
                         " outside the proof range (r0/2, 1/2)");
    if (k_max < 1 || k_max > 10) throw InvalidInput("k_max must be in [1, 10]");
  }
  if (threads < 0) throw InvalidInput("threads must be >= 0");
}

}  // namespace carleman
