#pragma once

#include "carleman/grid.hpp"
#include "carleman/pseudoconvexity.hpp"
#include "carleman/types.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace carleman {

using Json = nlohmann::json;

// SHA-256 hex digest; used as the content hash of report payloads.
std::string sha256_hex(const std::string& data);

// Shortest round-trip double formatting for CSV cells.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Field dumps: CSV (coordinates + value, mask nodes only) and the compact
// binary record (uint32 dim, per-axis uint32 count and float64 min/max, then
// row-major float64 values, little-endian).
void field_to_csv(const ScalarField& f, const std::string& path);
void field_to_binary(const ScalarField& f, const std::string& path);

// Versioned certificate record consumed by the sweep and three-sphere stages.
Json certificate_to_json(const PseudoconvexityCertificate& cert);

}  // namespace carleman
