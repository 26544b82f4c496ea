#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nodalheat/cli/session.hpp"

namespace nodalheat::cli {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  /// One line per individual check, each ending in its verdict.
  std::vector<std::string> details;
  /// Quantities that are printed but deliberately not asserted.
  std::vector<std::string> reported;
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<CriterionResult> criteria;
  [[nodiscard]] bool all_passed() const;
};

inline constexpr int kCriterionCount = 9;

/// J0 by its power series; accurate to ~1e-15 for 0 <= x <= 6.
double bessel_j0(double x);
/// First positive zero of J0 by bisection on the series.
double bessel_j0_first_root();

/// Runs one acceptance criterion (1 .. kCriterionCount).
/// Solver exceptions are caught and reported as a failed check.
CriterionResult run_criterion(int id, Session& session);

/// Runs the listed criteria in order (all of them when ids is empty).
VerifyReport run_verification(Session& session, const std::vector<int>& ids = {});

nlohmann::json to_json(const VerifyReport& report);

}  // namespace nodalheat::cli
