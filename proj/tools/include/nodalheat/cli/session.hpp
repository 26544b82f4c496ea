#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>

#include "nodalheat/cli/cache.hpp"
#include "nodalheat/shooting.hpp"
#include "nodalheat/spectral.hpp"

namespace nodalheat::cli {

/// Memoizes solutions and eigenpairs for one run, backed by the optional
/// on-disk cache. Returned references stay valid for the session lifetime.
/// Safe to use from several threads.
class Session {
 public:
  explicit Session(std::optional<ArtifactCache> cache = std::nullopt,
                   std::size_t node_count = kDefaultSolutionNodes);

  [[nodiscard]] std::size_t node_count() const noexcept { return node_count_; }

  const StationarySolution& solution(double p, int K);
  /// First eigenpair of the linearized operator on the solution's grid.
  const EigenPair& eigenpair(double p, int K);
  const EigenPair& limit_pair(double R = 40.0, std::size_t nodes = 8001);

  /// Artifacts computed (not loaded) during this session.
  [[nodiscard]] std::size_t computed_count() const;

 private:
  std::optional<ArtifactCache> cache_;
  std::size_t node_count_;
  mutable std::mutex mutex_;
  std::map<std::tuple<double, int>, std::unique_ptr<StationarySolution>> solutions_;
  std::map<std::tuple<double, int>, std::unique_ptr<EigenPair>> pairs_;
  std::map<std::tuple<double, std::size_t>, std::unique_ptr<EigenPair>> limits_;
  std::size_t computed_ = 0;
};

}  // namespace nodalheat::cli
