#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nodalheat/evolution.hpp"
#include "nodalheat/shooting.hpp"

namespace nodalheat::cli {

/// Bumped whenever the meaning of a config key or a cached artifact changes.
inline constexpr int kSchemaVersion = 1;

/// Bad user input: maps to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::string command;

  double p = 50.0;
  int K = 2;
  std::size_t nodes = kDefaultSolutionNodes;

  bool limit = false;
  double R = 40.0;
  std::size_t limit_nodes = 8001;
  double compare_radius = 5.0;

  double lambda = 1.01;
  std::vector<double> lambdas{0.1, 0.5, 0.9, 0.99, 1.01, 1.1, 3.0};
  std::vector<double> p_list{20.0, 50.0, 100.0, 200.0};
  EvolutionControls evolution;

  std::string out_dir = ".";
  std::string cache_dir;
  bool use_cache = true;
};

/// Checks every numeric field against the solver preconditions.
/// Throws ValidationError naming the offending key.
void validate(const RunConfig& cfg);

/// Overlays the keys of a flat JSON object onto cfg. Unknown keys, wrong
/// types and a schema_version other than kSchemaVersion are rejected.
void apply_json(RunConfig& cfg, const nlohmann::json& j);

/// Reads a JSON file and applies it.
void apply_json_file(RunConfig& cfg, const std::string& path);

/// The full config as JSON, echoed into every run summary.
nlohmann::json to_json(const RunConfig& cfg);

/// Cache directory: explicit setting, else NODALHEAT_CACHE_DIR, else
/// ".nodalheat-cache" under the working directory.
std::string resolve_cache_dir(const RunConfig& cfg);

}  // namespace nodalheat::cli
