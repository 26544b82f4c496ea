#include "nodalheat/cli/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>

namespace nodalheat::cli {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

template <class T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config key '" + key + "' has the wrong type");
  }
}

double get_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw ValidationError("config key '" + key + "' must be a number");
  return v.get<double>();
}

std::size_t get_count(const nlohmann::json& v, const std::string& key) {
  // Literals built in C++ arrive as signed integers, parsed text as unsigned.
  const bool ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
  if (!ok) throw ValidationError("config key '" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

std::vector<double> get_numbers(const nlohmann::json& v, const std::string& key) {
  if (!v.is_array()) throw ValidationError("config key '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(get_number(x, key));
  return out;
}

using Setter = std::function<void(RunConfig&, const nlohmann::json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"schema_version",
       [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
         if (!v.is_number_integer()) throw ValidationError("config key '" + k + "' must be an integer");
         c.schema_version = v.get<int>();
         require(c.schema_version == kSchemaVersion,
                 "schema_version " + std::to_string(c.schema_version) + " is not supported (expected " +
                     std::to_string(kSchemaVersion) + ")");
       }},
      {"command", [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.command = get_as<std::string>(v, k); }},
      {"p", [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.p = get_number(v, k); }},
      {"K",
       [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
         if (!v.is_number_integer()) throw ValidationError("config key '" + k + "' must be an integer");
         c.K = v.get<int>();
       }},
      {"nodes", [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.nodes = get_count(v, k); }},
      {"limit", [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.limit = get_as<bool>(v, k); }},
      {"R", [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.R = get_number(v, k); }},
      {"limit_nodes", [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.limit_nodes = get_count(v, k); }},
      {"compare_radius",
       [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.compare_radius = get_number(v, k); }},
      {"lambda", [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.lambda = get_number(v, k); }},
      {"lambdas", [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.lambdas = get_numbers(v, k); }},
      {"p_list", [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.p_list = get_numbers(v, k); }},
      {"t_max", [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.evolution.t_max = get_number(v, k); }},
      {"dt_init",
       [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.evolution.dt_init = get_number(v, k); }},
      {"dt_floor",
       [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.evolution.dt_floor = get_number(v, k); }},
      {"blowup_threshold",
       [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
         c.evolution.blowup_threshold = get_number(v, k);
       }},
      {"decay_threshold",
       [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
         c.evolution.decay_threshold = get_number(v, k);
       }},
      {"rel_tol",
       [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.evolution.rel_tol = get_number(v, k); }},
      {"evolution_nodes",
       [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.evolution.grid_nodes = get_count(v, k); }},
      {"max_steps",
       [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.evolution.max_steps = get_count(v, k); }},
      {"out_dir", [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.out_dir = get_as<std::string>(v, k); }},
      {"cache_dir",
       [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.cache_dir = get_as<std::string>(v, k); }},
      {"use_cache", [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.use_cache = get_as<bool>(v, k); }},
  };
  return table;
}

}  // namespace

void validate(const RunConfig& c) {
  require(c.schema_version == kSchemaVersion, "schema_version must be " + std::to_string(kSchemaVersion));
  require(std::isfinite(c.p) && c.p > 1.0, "p must be a finite number greater than 1");
  require(c.K >= 1, "K must be at least 1");
  require(c.nodes >= 3, "nodes must be at least 3");
  require(std::isfinite(c.R) && c.R >= 20.0, "R must be at least 20");
  require(c.limit_nodes >= 3, "limit_nodes must be at least 3");
  require(finite_positive(c.compare_radius), "compare_radius must be positive");
  require(std::isfinite(c.lambda), "lambda must be finite");
  for (double l : c.lambdas) require(std::isfinite(l), "lambdas must be finite");
  require(!c.p_list.empty(), "p_list must not be empty");
  for (std::size_t i = 0; i < c.p_list.size(); ++i) {
    require(std::isfinite(c.p_list[i]) && c.p_list[i] > 1.0, "every p in p_list must exceed 1");
    require(i == 0 || c.p_list[i] > c.p_list[i - 1], "p_list must be strictly ascending");
  }
  const auto& e = c.evolution;
  require(finite_positive(e.t_max), "t_max must be positive");
  require(finite_positive(e.dt_init), "dt_init must be positive");
  require(finite_positive(e.dt_floor), "dt_floor must be positive");
  require(std::isfinite(e.blowup_threshold) && e.blowup_threshold >= 1e6, "blowup_threshold must be at least 1e6");
  require(finite_positive(e.decay_threshold) && e.decay_threshold < 1.0, "decay_threshold must lie in (0, 1)");
  require(finite_positive(e.rel_tol) && e.rel_tol < 1.0, "rel_tol must lie in (0, 1)");
  require(e.grid_nodes >= 3, "evolution_nodes must be at least 3");
  require(e.max_steps >= 1, "max_steps must be at least 1");
  require(!c.out_dir.empty(), "out_dir must not be empty");
}

void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  const auto& table = setters();
  for (const auto& [key, value] : j.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ValidationError("unknown config key '" + key + "'");
    it->second(cfg, value, key);
  }
}

void apply_json_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  apply_json(cfg, j);
}

nlohmann::json to_json(const RunConfig& c) {
  const auto& e = c.evolution;
  return {{"schema_version", c.schema_version},
          {"command", c.command},
          {"p", c.p},
          {"K", c.K},
          {"nodes", c.nodes},
          {"limit", c.limit},
          {"R", c.R},
          {"limit_nodes", c.limit_nodes},
          {"compare_radius", c.compare_radius},
          {"lambda", c.lambda},
          {"lambdas", c.lambdas},
          {"p_list", c.p_list},
          {"t_max", e.t_max},
          {"dt_init", e.dt_init},
          {"dt_floor", e.dt_floor},
          {"blowup_threshold", e.blowup_threshold},
          {"decay_threshold", e.decay_threshold},
          {"rel_tol", e.rel_tol},
          {"evolution_nodes", e.grid_nodes},
          {"max_steps", e.max_steps},
          {"out_dir", c.out_dir},
          {"cache_dir", c.cache_dir},
          {"use_cache", c.use_cache}};
}

std::string resolve_cache_dir(const RunConfig& cfg) {
  if (!cfg.cache_dir.empty()) return cfg.cache_dir;
  if (const char* env = std::getenv("NODALHEAT_CACHE_DIR"); env != nullptr && *env != '\0') return env;
  return ".nodalheat-cache";
}

}  // namespace nodalheat::cli
