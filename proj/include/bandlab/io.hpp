#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandlab/experiments.hpp"

namespace bandlab {

// Run provenance written next to the result CSVs.
struct Manifest {
  std::string tool;
  std::string version;
  std::uint64_t master_seed = 0;
  nlohmann::ordered_json config_echo;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> outputs;  // CSV paths written by the run
  long long resamples = 0;
  long long exclusions = 0;
};

// JSON round trip for configs.  Unknown fields are rejected so typos fail
// loudly.  Throws ConfigError with the offending field in the message.
// When `expected_kind` is set, a file that names a different kind is
// rejected and a file without one inherits it.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig parse_config_file(
    const std::string& path,
    std::optional<ExperimentKind> expected_kind = std::nullopt);
void write_config_file(const ExperimentConfig& cfg, const std::string& path);

// Writes {dir}/{experiment}.csv (dir created if needed), columns
//   experiment,replica,seed,M,N,stat_name,stat_value,flags
// with 17-significant-digit floats, LF endings, rows in record order, and an
// atomic write-then-rename.  An empty record list yields a header-only file.
// Returns the paths written (a single path).
std::vector<std::string> write_results(const std::vector<ResultRecord>& records,
                                       const std::string& dir,
                                       const std::string& experiment);

// manifest.json with stable key order; atomic like the CSVs.
std::string write_manifest(const Manifest& manifest, const std::string& dir);

std::string utc_timestamp();

}  // namespace bandlab
