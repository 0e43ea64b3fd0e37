#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chebyrl/analytic.hpp"
#include "chebyrl/cheby.hpp"
#include "chebyrl/policy.hpp"
#include "chebyrl/train.hpp"

namespace chebyrl {

/// Library version, as configured by CMake.
const char* version();

/// {"n", "d", "bounds": [[lo, hi], ..], "coeffs": [..]}.
nlohmann::json to_json(const ChebyModel& model);
/// Throws SchemaError on missing keys, wrong types or a coefficient count
/// other than (d+1)^n.
ChebyModel model_from_json(const nlohmann::json& j);

/// A trained policy together with where it came from.
struct PolicyFile {
  std::string env = "mountaincar";
  std::string algo;
  std::uint64_t seed = 0;
  GaussianChebyPolicy policy;
};

nlohmann::json to_json(const PolicyFile& file);
/// Throws SchemaError on any mismatch with the documented layout.
PolicyFile policy_from_json(const nlohmann::json& j);

/// Throws SchemaError when the file cannot be read or does not parse.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Round-trip precision for every double; `indent` < 0 writes one line.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j, int indent = 2);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Per-run artifact: seed, config, training return series, divergence, timing,
/// eval returns.
nlohmann::json to_json(const RunStats& stats);
/// `update,mean_return`.
void write_learning_curve_csv(std::ostream& out, const std::vector<double>& returns);

nlohmann::json to_json(const Phase2Solution& s);
nlohmann::json to_json(const AnalyticSolution& s);
nlohmann::json to_json(const FeasibilityScan& scan);
/// `x,v_boundary` rows of the phase boundary polyline.
void write_boundary_csv(std::ostream& out, const PhaseBoundary& boundary);

/// FNV-1a 64-bit hash of the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

struct Manifest {
  std::vector<std::string> command;  // argv as invoked
  nlohmann::json config;             // fully resolved command configuration
  std::string config_hash;
  std::uint64_t base_seed = 0;
  std::vector<std::string> artifacts;  // paths relative to the output directory
  std::string version;
  std::string timestamp;  // UTC, ISO 8601
};

nlohmann::json to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace chebyrl
