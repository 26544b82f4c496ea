#pragma once

#include <stdexcept>

namespace nodalheat {

/// An iterative method ran out of budget (steps, radius, iterations) before
/// reaching its target. Input validation failures use std::invalid_argument.
class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The eigensolver could not produce an eigenpair within its iteration limit.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nodalheat
