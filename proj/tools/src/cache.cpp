#include "nodalheat/cli/cache.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace nodalheat::cli {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json CacheKey::to_json() const {
  return {{"kind", kind}, {"p", p}, {"K", K}, {"grid", grid_signature}, {"schema_version", schema_version}};
}

std::string CacheKey::digest() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json().dump())));
  return buf;
}

nlohmann::json grid_to_json(const RadialGrid& grid) {
  return {{"mapping", grid.mapping() == GridMapping::Sinh ? "sinh" : "uniform"},
          {"nodes", grid.size()},
          {"R", grid.outer_radius()},
          {"core_scale", grid.core_scale()}};
}

RadialGrid grid_from_json(const nlohmann::json& j) {
  const auto n = j.at("nodes").get<std::size_t>();
  const auto R = j.at("R").get<double>();
  if (j.at("mapping").get<std::string>() == "sinh") return make_graded_grid(n, R, j.at("core_scale").get<double>());
  return make_uniform_grid(n, R);
}

ArtifactCache::ArtifactCache(fs::path dir, int schema_version) : dir_(std::move(dir)), schema_version_(schema_version) {}

fs::path ArtifactCache::path_for(const CacheKey& key) const { return dir_ / (key.kind + "-" + key.digest() + ".json"); }

CacheKey ArtifactCache::solution_key(double p, int K, const std::string& layout, int schema_version) {
  return {"solution", p, K, layout, schema_version};
}

std::string ArtifactCache::auto_layout(std::size_t node_count) {
  return "solution_grid:n=" + std::to_string(node_count);
}

CacheKey ArtifactCache::eigenpair_key(double p, int K, const RadialGrid& grid, int schema_version) {
  return {"eigenpair", p, K, grid.signature(), schema_version};
}

CacheKey ArtifactCache::limit_key(const RadialGrid& grid, int schema_version) {
  return {"limit", 0.0, 0, grid.signature(), schema_version};
}

void ArtifactCache::write_atomic(const CacheKey& key, const nlohmann::json& payload) const {
  static std::atomic<unsigned long> counter{0};
  fs::create_directories(dir_);
  const fs::path target = path_for(key);
  std::ostringstream tmp_name;
  tmp_name << target.filename().string() << ".tmp." << ::getpid() << "." << std::this_thread::get_id() << "."
           << counter.fetch_add(1);
  const fs::path tmp = dir_ / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
    nlohmann::json doc = {{"key", key.to_json()}, {"payload", payload}};
    out << doc.dump();
    if (!out) throw std::runtime_error("failed writing cache file " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::optional<nlohmann::json> ArtifactCache::read(const CacheKey& key) const {
  const fs::path path = path_for(key);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    nlohmann::json doc;
    in >> doc;
    if (doc.at("key") != key.to_json()) return std::nullopt;
    return doc.at("payload");
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "warning: ignoring corrupt cache file " << path.string() << ": " << e.what() << "\n";
    return std::nullopt;
  }
}

void ArtifactCache::store_solution(const StationarySolution& sol, const std::string& layout) const {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : sol.trajectory.samples()) samples.push_back({s.t, s.w, s.dw});
  const auto zeros = sol.trajectory.log_zeros();
  nlohmann::json payload = {{"p", sol.p},
                            {"K", sol.K},
                            {"grid", grid_to_json(sol.grid)},
                            {"log_zeros", std::vector<double>(zeros.begin(), zeros.end())},
                            {"samples", samples}};
  write_atomic(solution_key(sol.p, sol.K, layout, schema_version_), payload);
}

std::optional<StationarySolution> ArtifactCache::load_solution(double p, int K, const std::string& layout) const {
  const auto payload = read(solution_key(p, K, layout, schema_version_));
  if (!payload) return std::nullopt;
  try {
    std::vector<LaneEmdenTrajectory::Sample> samples;
    for (const auto& s : payload->at("samples")) {
      samples.push_back({s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()});
    }
    LaneEmdenTrajectory trajectory(p, std::move(samples), payload->at("log_zeros").get<std::vector<double>>());
    return assemble_solution(p, K, std::move(trajectory), grid_from_json(payload->at("grid")));
  } catch (const std::exception& e) {
    std::cerr << "warning: ignoring unreadable cached solution: " << e.what() << "\n";
    return std::nullopt;
  }
}

void ArtifactCache::store_eigenpair(const CacheKey& key, const EigenPair& pair) const {
  nlohmann::json payload = {{"eigenvalue", pair.eigenvalue},
                            {"residual", pair.residual},
                            {"grid", grid_to_json(pair.grid)},
                            {"eigenfunction", pair.eigenfunction}};
  write_atomic(key, payload);
}

std::optional<EigenPair> ArtifactCache::load_eigenpair(const CacheKey& key) const {
  const auto payload = read(key);
  if (!payload) return std::nullopt;
  try {
    EigenPair pair;
    pair.eigenvalue = payload->at("eigenvalue").get<double>();
    pair.residual = payload->at("residual").get<double>();
    pair.grid = grid_from_json(payload->at("grid"));
    pair.eigenfunction = payload->at("eigenfunction").get<std::vector<double>>();
    if (pair.grid.signature() != key.grid_signature || pair.eigenfunction.size() != pair.grid.size()) {
      return std::nullopt;
    }
    return pair;
  } catch (const std::exception& e) {
    std::cerr << "warning: ignoring unreadable cached eigenpair: " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace nodalheat::cli
