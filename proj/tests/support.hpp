#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <utility>

#include "nodalheat/shooting.hpp"
#include "nodalheat/spectral.hpp"

namespace nodalheat::testing {

/// Solutions are shared by every test in one binary; solving p = 200 on
/// 20001 nodes a dozen times would dominate the run time.
inline const StationarySolution& solution(double p, int K, std::size_t nodes = kDefaultSolutionNodes) {
  static std::mutex mutex;
  static std::map<std::tuple<double, int, std::size_t>, std::unique_ptr<StationarySolution>> memo;
  std::lock_guard lock(mutex);
  auto& slot = memo[{p, K, nodes}];
  if (!slot) slot = std::make_unique<StationarySolution>(stationary_solution(p, K, nodes));
  return *slot;
}

inline const EigenPair& linearized_pair(double p, int K) {
  static std::mutex mutex;
  static std::map<std::pair<double, int>, std::unique_ptr<EigenPair>> memo;
  const auto& sol = solution(p, K);
  std::lock_guard lock(mutex);
  auto& slot = memo[{p, K}];
  if (!slot) slot = std::make_unique<EigenPair>(first_eigenpair(linearized_operator(sol)));
  return *slot;
}

inline const EigenPair& limit_pair(double R = 40.0) {
  static std::mutex mutex;
  static std::map<double, std::unique_ptr<EigenPair>> memo;
  std::lock_guard lock(mutex);
  auto& slot = memo[R];
  if (!slot) slot = std::make_unique<EigenPair>(limit_eigenpair(R, static_cast<std::size_t>(200.0 * R) + 1));
  return *slot;
}

/// First positive zero of J0 from its power series, by bisection on [2, 3].
inline double bessel_j0_root() {
  auto j0 = [](double x) {
    double term = 1.0, sum = 1.0;
    const double q = -0.25 * x * x;
    for (int k = 1; k < 60; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
    }
    return sum;
  };
  double lo = 2.0, hi = 3.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (j0(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Seeded generator for the property tests so failures reproduce.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::size_t count(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace nodalheat::testing
