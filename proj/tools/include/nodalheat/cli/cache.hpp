#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "nodalheat/shooting.hpp"
#include "nodalheat/spectral.hpp"

namespace nodalheat::cli {

/// Identity of a cached artifact. Two keys hit the same entry only if every
/// field matches; the hash only picks the file name.
struct CacheKey {
  std::string kind;  // "solution", "eigenpair", "limit"
  double p = 0.0;
  int K = 0;
  std::string grid_signature;
  int schema_version = 0;

  [[nodiscard]] nlohmann::json to_json() const;
  /// 64-bit FNV-1a of the canonical JSON text, as 16 hex digits.
  [[nodiscard]] std::string digest() const;
  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

std::uint64_t fnv1a(std::string_view bytes);

nlohmann::json grid_to_json(const RadialGrid& grid);
RadialGrid grid_from_json(const nlohmann::json& j);

/// On-disk store of solutions and eigenpairs, one JSON file per key.
///
/// Writes go to a uniquely named temporary file that is then renamed into
/// place, so readers never see partial files and concurrent writers to
/// distinct keys do not interfere. A corrupt or mismatching file is a miss.
class ArtifactCache {
 public:
  explicit ArtifactCache(std::filesystem::path dir, int schema_version = 1);

  [[nodiscard]] const std::filesystem::path& directory() const noexcept { return dir_; }
  [[nodiscard]] std::filesystem::path path_for(const CacheKey& key) const;

  /// layout names the grid: a RadialGrid signature, or auto_layout(n) for
  /// the epsilon-adapted grid that stationary_solution(p, K, n) builds.
  static CacheKey solution_key(double p, int K, const std::string& layout, int schema_version);
  static std::string auto_layout(std::size_t node_count);
  static CacheKey eigenpair_key(double p, int K, const RadialGrid& grid, int schema_version);
  static CacheKey limit_key(const RadialGrid& grid, int schema_version);

  void store_solution(const StationarySolution& sol, const std::string& layout) const;
  [[nodiscard]] std::optional<StationarySolution> load_solution(double p, int K, const std::string& layout) const;

  /// key must come from eigenpair_key or limit_key.
  void store_eigenpair(const CacheKey& key, const EigenPair& pair) const;
  [[nodiscard]] std::optional<EigenPair> load_eigenpair(const CacheKey& key) const;

  [[nodiscard]] int schema_version() const noexcept { return schema_version_; }

 private:
  void write_atomic(const CacheKey& key, const nlohmann::json& payload) const;
  [[nodiscard]] std::optional<nlohmann::json> read(const CacheKey& key) const;

  std::filesystem::path dir_;
  int schema_version_;
};

}  // namespace nodalheat::cli
