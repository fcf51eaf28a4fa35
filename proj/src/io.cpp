#include "bandlab/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>

#include "bandlab/errors.hpp"
#include "bandlab/version.hpp"

namespace bandlab {

namespace fs = std::filesystem;

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> known = {
      "kind",     "M_list",      "N_list",     "lambda", "epsilon",
      "replicas", "master_seed", "output_dir", "workers"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw ConfigError("config: unknown field '" + key + "'");
    }
  }

  ExperimentConfig cfg;
  const auto get_int_list = [&j](const char* field, std::vector<int>& dst) {
    if (!j.contains(field)) return;
    const auto& v = j.at(field);
    if (!v.is_array()) {
      throw ConfigError(std::string("config: field '") + field +
                        "' must be an array of integers");
    }
    dst.clear();
    for (const auto& e : v) {
      if (!e.is_number_integer() && !e.is_number_unsigned()) {
        throw ConfigError(std::string("config: field '") + field +
                          "' must contain integers");
      }
      dst.push_back(e.get<int>());
    }
  };

  if (j.contains("kind")) {
    if (!j.at("kind").is_string()) {
      throw ConfigError("config: field 'kind' must be a string");
    }
    cfg.kind = kind_from_name(j.at("kind").get<std::string>());
  }
  get_int_list("M_list", cfg.M_list);
  get_int_list("N_list", cfg.N_list);
  if (j.contains("lambda")) {
    if (!j.at("lambda").is_number()) {
      throw ConfigError("config: field 'lambda' must be a number");
    }
    cfg.lambda = j.at("lambda").get<double>();
  }
  if (j.contains("epsilon")) {
    if (!j.at("epsilon").is_number()) {
      throw ConfigError("config: field 'epsilon' must be a number");
    }
    cfg.epsilon = j.at("epsilon").get<double>();
  }
  if (j.contains("replicas")) {
    if (!j.at("replicas").is_number_integer() &&
        !j.at("replicas").is_number_unsigned()) {
      throw ConfigError("config: field 'replicas' must be an integer");
    }
    cfg.replicas = j.at("replicas").get<int>();
  }
  if (j.contains("master_seed")) {
    if (!j.at("master_seed").is_number_unsigned() &&
        !j.at("master_seed").is_number_integer()) {
      throw ConfigError("config: field 'master_seed' must be an integer");
    }
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) {
      throw ConfigError("config: field 'output_dir' must be a string");
    }
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("workers")) {
    if (!j.at("workers").is_number_integer() &&
        !j.at("workers").is_number_unsigned()) {
      throw ConfigError("config: field 'workers' must be an integer");
    }
    cfg.workers = j.at("workers").get<int>();
  }
  return cfg;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["kind"] = kind_name(cfg.kind);
  j["M_list"] = cfg.M_list;
  j["N_list"] = cfg.N_list;
  j["lambda"] = cfg.lambda;
  j["epsilon"] = cfg.epsilon;
  j["replicas"] = cfg.replicas;
  j["master_seed"] = cfg.master_seed;
  j["output_dir"] = cfg.output_dir;
  j["workers"] = cfg.workers;
  return j;
}

ExperimentConfig parse_config_file(const std::string& path,
                                   std::optional<ExperimentKind> expected_kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: JSON parse error in '" + path + "': " + e.what());
  }
  ExperimentConfig cfg = config_from_json(j);
  if (expected_kind) {
    if (j.contains("kind") && cfg.kind != *expected_kind) {
      throw ConfigError("config: field 'kind' ('" + kind_name(cfg.kind) +
                        "') does not match the subcommand ('" +
                        kind_name(*expected_kind) + "')");
    }
    cfg.kind = *expected_kind;
  }
  return cfg;
}

void write_config_file(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config file '" + path + "'");
  out << config_to_json(cfg).dump(2) << "\n";
}

namespace {

std::string format_value(double v) {
  if (!std::isfinite(v)) {
    throw IoError("write_results: non-finite statistic value");
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const fs::path& target, const std::string& contents) {
  const fs::path tmp = target.parent_path() /
                       (".tmp." + target.filename().string());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    if (!out) throw IoError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    throw IoError("rename '" + tmp.string() + "' -> '" + target.string() +
                  "' failed: " + ec.message());
  }
}

}  // namespace

std::vector<std::string> write_results(const std::vector<ResultRecord>& records,
                                       const std::string& dir,
                                       const std::string& experiment) {
  fs::create_directories(dir);
  std::string body = "experiment,replica,seed,M,N,stat_name,stat_value,flags\n";
  for (const auto& rec : records) {
    if (rec.experiment != experiment) {
      throw IoError("write_results: record experiment '" + rec.experiment +
                    "' does not match '" + experiment + "'");
    }
    char prefix[128];
    std::snprintf(prefix, sizeof(prefix), "%s,%lld,%" PRIu64 ",%d,%d,",
                  rec.experiment.c_str(), rec.replica, rec.seed, rec.M, rec.N);
    for (const auto& [name, value] : rec.stats) {
      body += prefix;
      body += name;
      body += ',';
      body += format_value(value);
      body += ',';
      body += std::to_string(rec.flags);
      body += '\n';
    }
  }
  const fs::path target = fs::path(dir) / (experiment + ".csv");
  atomic_write(target, body);
  return {target.string()};
}

std::string write_manifest(const Manifest& manifest, const std::string& dir) {
  fs::create_directories(dir);
  nlohmann::ordered_json j;
  j["tool"] = manifest.tool;
  j["version"] = manifest.version;
  j["master_seed"] = manifest.master_seed;
  j["config"] = manifest.config_echo;
  j["started_utc"] = manifest.started_utc;
  j["finished_utc"] = manifest.finished_utc;
  j["outputs"] = manifest.outputs;
  j["resamples"] = manifest.resamples;
  j["exclusions"] = manifest.exclusions;
  const fs::path target = fs::path(dir) / "manifest.json";
  atomic_write(target, j.dump(2) + "\n");
  return target.string();
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace bandlab
