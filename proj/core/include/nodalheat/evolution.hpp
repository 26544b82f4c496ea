#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nodalheat/grid.hpp"
#include "nodalheat/shooting.hpp"

namespace nodalheat {

/// A radial field on a grid of the unit disk at time t; the outer node is
/// the Dirichlet boundary and is kept at zero.
struct RadialField {
  double time = 0.0;
  std::vector<double> values;
};

/// One step of v_t - Delta v = |v|^{p-1} v on the unit disk with v = 0 on
/// the boundary.
///
/// Strang splitting R(dt/2) D(dt) R(dt/2). The reaction substep is the exact
/// flow of v' = |v|^{p-1} v, evaluated in log space. The diffusion substep is
/// TR-BDF2: a Crank-Nicolson stage to t + gamma dt followed by a BDF2 stage,
/// both tridiagonal solves with the finite-volume Laplacian. The BDF2 stage
/// damps the stiff modes that plain Crank-Nicolson leaves oscillating.
class HeatStepper {
 public:
  HeatStepper(RadialGrid grid, double p);

  [[nodiscard]] const RadialGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] double exponent() const noexcept { return p_; }
  /// Largest diagonal rate A_ii / M_ii of the discrete Laplacian.
  [[nodiscard]] double max_diffusion_rate() const noexcept { return max_rate_; }

  /// Empty when the step produced non-finite values (the caller should
  /// retry with a smaller dt). Requires dt > 0.
  [[nodiscard]] std::optional<RadialField> step(const RadialField& state, double dt) const;

  /// Diffusion alone over dt (reaction switched off).
  [[nodiscard]] std::vector<double> diffuse(std::span<const double> values, double dt) const;
  /// Exact reaction flow over dt; empty if some node blows up within dt.
  [[nodiscard]] std::optional<std::vector<double>> react(std::span<const double> values, double dt) const;
  /// The same flow with the step given as log(dt), for steps below the
  /// smallest representable double (p ~ 200 near blowup).
  [[nodiscard]] std::optional<std::vector<double>> react_log(std::span<const double> values, double log_dt) const;

 private:
  void solve_shifted(double alpha, std::span<const double> rhs, std::vector<double>& out) const;

  RadialGrid grid_;
  double p_ = 0.0;
  std::vector<double> a_diag_, a_off_, mass_;
  double max_rate_ = 0.0;
};

/// Adaptive integration from state.time to t_end with step-doubling error
/// control and no classification. Throws NoConvergence if dt collapses.
RadialField integrate_heat(const HeatStepper& stepper, RadialField state, double t_end, double dt_init,
                           double rel_tol = 1e-7);

enum class Classification { Blowup, GlobalDecay, Undecided };

const char* to_string(Classification c);

/// Thresholds are physical; dt_init and dt_floor are in units of eps_p^2,
/// the time scale on which u_{p,K} lives (eps_p^2 is ~1e-80 at p = 200).
struct EvolutionControls {
  double t_max = 10.0;
  double dt_init = 1e-3;
  double blowup_threshold = 1e8;
  double decay_threshold = 1e-3;
  double dt_floor = 1e-14;
  double rel_tol = 1e-6;
  /// dt <= reaction_cap / ((p-1) ||v||^{p-1}), a fixed fraction of the
  /// remaining blowup time of the pure reaction.
  double reaction_cap = 0.1;
  std::size_t grid_nodes = 8001;
  std::size_t max_steps = 1'000'000;
};

struct TracePoint {
  double t = 0.0;
  double sup_norm = 0.0;
};

struct EvolutionOutcome {
  Classification classification = Classification::Undecided;
  std::optional<double> blowup_time_estimate;
  std::vector<TracePoint> supnorm_trace;
  double final_time = 0.0;
  double lambda = 0.0;
  std::size_t steps = 0;
};

/// Throws std::invalid_argument for non-positive controls or
/// blowup_threshold < 1e6.
void validate(const EvolutionControls& controls);

/// Evolves v0 = lambda u_{p,K} and classifies the outcome.
EvolutionOutcome evolve_classify(const StationarySolution& sol, double lambda, const EvolutionControls& controls = {});

/// Outcomes in input order, one task per lambda.
std::vector<EvolutionOutcome> lambda_scan(const StationarySolution& sol, const std::vector<double>& lambdas,
                                          const EvolutionControls& controls = {});

/// Empirical transition points between decay and blowup on each side of 1.
struct ScanWindow {
  /// Largest lambda < 1 that decayed and smallest lambda < 1 above it that blew up.
  std::optional<double> below_decay, below_blowup;
  /// Largest lambda > 1 not classified as blowup and smallest lambda > 1 that blew up.
  std::optional<double> above_not_blowup, above_blowup;
};

ScanWindow empirical_window(const std::vector<double>& lambdas, const std::vector<EvolutionOutcome>& outcomes);

}  // namespace nodalheat
