#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nodalheat/grid.hpp"

namespace nodalheat {

struct ShootingControls {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  /// Series start point; the r = 0 coefficient singularity is never evaluated.
  double start_radius = 1e-8;
  /// Give up once log(r) exceeds this. Zeros sit near r ~ exp(c * p), so the
  /// cap is expressed in log-radius rather than radius.
  double log_max_radius = 5000.0;
  /// Largest step in log-radius, so no zero can hide inside one step.
  double max_log_step = 2.0;
  std::size_t max_steps = 2'000'000;
};

/// Dense solution of w'' + w'/s + |w|^{p-1} w = 0 with w(0) = 1, w'(0) = 0.
///
/// The ODE is integrated in t = log s, where it reads
/// w_tt = -exp(2t) |w|^{p-1} w, so zeros at s ~ 1e21 and beyond cost nothing
/// special. Between accepted steps the solution is the quintic Hermite
/// interpolant of (w, w_t, w_tt) at both ends.
class LaneEmdenTrajectory {
 public:
  /// One accepted step endpoint; dw is dw/dt.
  struct Sample {
    double t = 0.0;
    double w = 0.0;
    double dw = 0.0;
  };

  LaneEmdenTrajectory() = default;
  LaneEmdenTrajectory(double p, std::vector<Sample> samples, std::vector<double> log_zeros);

  [[nodiscard]] double exponent() const noexcept { return p_; }
  [[nodiscard]] std::span<const Sample> samples() const noexcept { return samples_; }
  /// log of the zeros rho_1 < rho_2 < ...
  [[nodiscard]] std::span<const double> log_zeros() const noexcept { return log_zeros_; }
  [[nodiscard]] double start_log_radius() const { return samples_.front().t; }
  [[nodiscard]] double end_log_radius() const { return samples_.back().t; }

  /// w and dw/dt at t = log s. Below the start point the series
  /// w = 1 - s^2/4 + p s^4/64 is used.
  [[nodiscard]] double value_at_log(double t) const;
  [[nodiscard]] double log_slope_at_log(double t) const;

  /// w(s) and dw/ds for s >= 0.
  [[nodiscard]] double value(double s) const;
  [[nodiscard]] double slope(double s) const;

  /// w_tt from the ODE itself.
  [[nodiscard]] double curvature(double t, double w) const;

  /// max |w| over [t_a, t_b], located through the roots of w_t.
  [[nodiscard]] double max_abs_between(double t_a, double t_b) const;

 private:
  [[nodiscard]] std::size_t segment_of(double t) const;

  double p_ = 0.0;
  std::vector<Sample> samples_;
  std::vector<double> log_zeros_;
};

/// Integrates until zero_target zeros are found.
/// Throws std::invalid_argument for p <= 1 or zero_target < 1, and
/// NoConvergence when log_max_radius or max_steps is exhausted first.
LaneEmdenTrajectory integrate_lane_emden(double p, int zero_target, const ShootingControls& controls = {});

/// Radial K-nodal solution of -Delta u = |u|^{p-1} u on the unit disk with
/// u(1) = 0 and u(0) > 0, obtained from the trajectory by the scaling
/// u(r) = rho_K^{2/(p-1)} w(rho_K r).
struct StationarySolution {
  double p = 0.0;
  int K = 0;
  RadialGrid grid;
  std::vector<double> values;
  /// r_{p,K,j} = rho_j / rho_K, j = 1 .. K-1.
  std::vector<double> nodal_radii;
  double amplitude = 0.0;
  double epsilon = 0.0;
  double log_epsilon = 0.0;
  /// log rho_K.
  double log_outer_zero = 0.0;
  LaneEmdenTrajectory trajectory;

  /// u(r) for r >= 0; zero outside the unit disk.
  [[nodiscard]] double value_at(double r) const;
  /// du/dr for r >= 0; zero outside the unit disk.
  [[nodiscard]] double derivative_at(double r) const;
  /// u(eps x) / u(0) = w(x / sqrt(p)), zero beyond x = 1/eps.
  [[nodiscard]] double normalized_at_rescaled(double x) const;
  /// d/dx of normalized_at_rescaled.
  [[nodiscard]] double normalized_slope_at_rescaled(double x) const;
  /// Radius 1/eps of the rescaled domain, possibly +inf when eps underflows.
  [[nodiscard]] double rescaled_radius() const;
};

/// Default node count for grids built by stationary_solution(p, K).
inline constexpr std::size_t kDefaultSolutionNodes = 20001;

/// Sinh-graded unit-disk grid whose core width is epsilon.
RadialGrid solution_grid(double epsilon, std::size_t node_count = kDefaultSolutionNodes);

/// grid must have outer radius 1 (std::invalid_argument otherwise).
StationarySolution stationary_solution(double p, int K, const RadialGrid& grid,
                                       const ShootingControls& controls = {});

/// Solves first, then samples on solution_grid(epsilon, node_count).
StationarySolution stationary_solution(double p, int K, std::size_t node_count = kDefaultSolutionNodes,
                                       const ShootingControls& controls = {});

/// Builds a solution from an already integrated trajectory (used by the cache).
StationarySolution assemble_solution(double p, int K, LaneEmdenTrajectory trajectory,
                                     const RadialGrid& grid);

/// M_1 > M_2 > ... > M_K, the peak |u| in each nodal region, innermost first.
std::vector<double> local_maxima(const StationarySolution& sol);

/// (p * u(0)^{p-1})^{-1/2}, evaluated in log space.
double epsilon_of(const StationarySolution& sol);

}  // namespace nodalheat
