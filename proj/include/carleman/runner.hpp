#pragma once

#include "carleman/config.hpp"
#include "carleman/report.hpp"

#include <string>

namespace carleman {

struct ReportBundle {
  Json payload;              // config echo + per-command results (hashed)
  std::string content_hash;  // sha256 of the serialized payload
  double elapsed_seconds = 0.0;  // not part of the hash
  int exit_code = 0;         // 0 pass, 2 certification/inequality failure
};

// Executes the configured command pipeline. Module errors propagate as
// exceptions (the CLI maps them to exit code 1); verification failures are
// reported in the payload with exit code 2. When write_artifacts is true,
// report.json and per-command CSVs land in cfg.out_dir.
ReportBundle run(const RunConfig& cfg, bool write_artifacts = true);

Json config_echo(const RunConfig& cfg);

}  // namespace carleman
