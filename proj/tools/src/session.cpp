#include "nodalheat/cli/session.hpp"

namespace nodalheat::cli {

Session::Session(std::optional<ArtifactCache> cache, std::size_t node_count)
    : cache_(std::move(cache)), node_count_(node_count) {}

std::size_t Session::computed_count() const {
  std::lock_guard lock(mutex_);
  return computed_;
}

// Solves run under the lock: sessions are used for desk-scale batches where
// simplicity beats concurrent solves of the same key.
const StationarySolution& Session::solution(double p, int K) {
  std::lock_guard lock(mutex_);
  auto& slot = solutions_[{p, K}];
  if (slot) return *slot;
  const auto layout = ArtifactCache::auto_layout(node_count_);
  if (cache_) {
    if (auto hit = cache_->load_solution(p, K, layout)) {
      slot = std::make_unique<StationarySolution>(std::move(*hit));
      return *slot;
    }
  }
  slot = std::make_unique<StationarySolution>(stationary_solution(p, K, node_count_));
  ++computed_;
  if (cache_) cache_->store_solution(*slot, layout);
  return *slot;
}

const EigenPair& Session::eigenpair(double p, int K) {
  const StationarySolution& sol = solution(p, K);
  std::lock_guard lock(mutex_);
  auto& slot = pairs_[{p, K}];
  if (slot) return *slot;
  const auto key = ArtifactCache::eigenpair_key(p, K, sol.grid, cache_ ? cache_->schema_version() : 0);
  if (cache_) {
    if (auto hit = cache_->load_eigenpair(key)) {
      slot = std::make_unique<EigenPair>(std::move(*hit));
      return *slot;
    }
  }
  slot = std::make_unique<EigenPair>(first_eigenpair(linearized_operator(sol)));
  ++computed_;
  if (cache_) cache_->store_eigenpair(key, *slot);
  return *slot;
}

const EigenPair& Session::limit_pair(double R, std::size_t nodes) {
  std::lock_guard lock(mutex_);
  auto& slot = limits_[{R, nodes}];
  if (slot) return *slot;
  const auto key = ArtifactCache::limit_key(make_uniform_grid(nodes, R), cache_ ? cache_->schema_version() : 0);
  if (cache_) {
    if (auto hit = cache_->load_eigenpair(key)) {
      slot = std::make_unique<EigenPair>(std::move(*hit));
      return *slot;
    }
  }
  slot = std::make_unique<EigenPair>(limit_eigenpair(R, nodes));
  ++computed_;
  if (cache_) cache_->store_eigenpair(key, *slot);
  return *slot;
}

}  // namespace nodalheat::cli
