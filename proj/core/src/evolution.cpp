#include "nodalheat/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "nodalheat/errors.hpp"
#include "nodalheat/spectral.hpp"

namespace nodalheat {

namespace {

const double kGamma = 2.0 - std::sqrt(2.0);
constexpr double kFirstDiskEigenvalue = 5.783185962946784;  // j_{0,1}^2

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// 1 / ((p-1) m^{p-1}), the remaining lifetime of v' = v^p started at m.
double log_reaction_lifetime(double p, double m) { return -std::log(p - 1.0) - (p - 1.0) * std::log(m); }

struct DoublingResult {
  std::optional<RadialField> accepted;
  double error = std::numeric_limits<double>::infinity();
};

// One dt step against two dt/2 steps; error in units of rel_tol * scale.
DoublingResult doubling_step(const HeatStepper& stepper, const RadialField& state, double dt, double rel_tol) {
  DoublingResult out;
  const auto full = stepper.step(state, dt);
  if (!full) return out;
  const auto half = stepper.step(state, 0.5 * dt);
  if (!half) return out;
  auto two = stepper.step(*half, 0.5 * dt);
  if (!two) return out;
  const double scale = rel_tol * std::max(sup_norm(state.values), sup_norm(two->values));
  const double diff = sup_distance(full->values, two->values);
  out.error = scale > 0.0 ? diff / scale : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  two->time = state.time + dt;
  out.accepted = std::move(two);
  return out;
}

double step_factor(double error) {
  if (error == 0.0) return 5.0;
  if (!std::isfinite(error)) return 0.25;
  return std::clamp(0.9 * std::pow(error, -1.0 / 3.0), 0.2, 5.0);
}

bool tail_nonincreasing(const std::vector<TracePoint>& trace, std::size_t length) {
  const std::size_t n = trace.size();
  const std::size_t first = n > length ? n - length : 0;
  for (std::size_t i = first + 1; i < n; ++i) {
    if (trace[i].sup_norm > trace[i - 1].sup_norm) return false;
  }
  return true;
}

// Fits ||v||^{1-p} ~ c (T - t) over the last decade of the trace.
double estimate_blowup_time(const std::vector<TracePoint>& trace, double p) {
  const TracePoint last = trace.back();
  const double fallback = last.t + std::exp(log_reaction_lifetime(p, last.sup_norm));
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, sy = 0.0, sty = 0.0;
  for (auto it = trace.rbegin(); it != trace.rend() && it->sup_norm >= 0.1 * last.sup_norm; ++it) {
    const double log_y = (1.0 - p) * (std::log(it->sup_norm) - std::log(last.sup_norm));
    if (log_y > 700.0) break;
    const double y = std::exp(log_y);
    const double t = it->t - last.t;
    s0 += 1.0;
    s1 += t;
    s2 += t * t;
    sy += y;
    sty += t * y;
  }
  const double det = s0 * s2 - s1 * s1;
  if (s0 < 3.0 || !(det > 0.0)) return fallback;
  const double slope = (s0 * sty - s1 * sy) / det;
  const double intercept = (sy - slope * s1) / s0;
  if (!(slope < 0.0) || !std::isfinite(slope)) return fallback;
  const double estimate = last.t - intercept / slope;
  return std::isfinite(estimate) && estimate >= last.t ? estimate : fallback;
}

}  // namespace

HeatStepper::HeatStepper(RadialGrid grid, double p) : grid_(std::move(grid)), p_(p) {
  if (!(p > 1.0)) throw std::invalid_argument("exponent p must exceed 1");
  if (std::fabs(grid_.outer_radius() - 1.0) > 1e-15) {
    throw std::invalid_argument("the heat flow is posed on the unit disk (outer radius 1)");
  }
  const RadialOperator laplacian(grid_, std::vector<double>(grid_.size(), 0.0));
  const auto ad = laplacian.stiffness_diagonal();
  const auto ao = laplacian.stiffness_offdiagonal();
  const auto m = laplacian.mass();
  a_diag_.assign(ad.begin(), ad.end());
  a_off_.assign(ao.begin(), ao.end());
  mass_.assign(m.begin(), m.end());
  for (std::size_t i = 0; i < mass_.size(); ++i) max_rate_ = std::max(max_rate_, a_diag_[i] / mass_[i]);
}

void HeatStepper::solve_shifted(double alpha, std::span<const double> rhs, std::vector<double>& out) const {
  const std::size_t n = mass_.size();
  std::vector<double> c(n), g(n);
  double piv = mass_[0] + alpha * a_diag_[0];
  c[0] = n > 1 ? alpha * a_off_[0] / piv : 0.0;
  g[0] = rhs[0] / piv;
  for (std::size_t i = 1; i < n; ++i) {
    const double lower = alpha * a_off_[i - 1];
    piv = mass_[i] + alpha * a_diag_[i] - lower * c[i - 1];
    c[i] = i + 1 < n ? alpha * a_off_[i] / piv : 0.0;
    g[i] = (rhs[i] - lower * g[i - 1]) / piv;
  }
  out.assign(n + 1, 0.0);
  out[n - 1] = g[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) out[i] = g[i] - c[i] * out[i + 1];
}

std::vector<double> HeatStepper::diffuse(std::span<const double> v, double dt) const {
  if (v.size() != grid_.size()) throw std::invalid_argument("field length does not match grid");
  const std::size_t n = mass_.size();
  auto apply_a = [&](std::span<const double> x, std::size_t i) {
    double s = a_diag_[i] * x[i];
    if (i > 0) s += a_off_[i - 1] * x[i - 1];
    if (i + 1 < n) s += a_off_[i] * x[i + 1];
    return s;
  };

  // Crank-Nicolson to t + gamma dt.
  const double a1 = 0.5 * kGamma * dt;
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = mass_[i] * v[i] - a1 * apply_a(v, i);
  std::vector<double> mid;
  solve_shifted(a1, rhs, mid);

  // BDF2 from (t, t + gamma dt) to t + dt.
  const double w_mid = 1.0 / (kGamma * (2.0 - kGamma));
  const double w_old = (1.0 - kGamma) * (1.0 - kGamma) / (kGamma * (2.0 - kGamma));
  const double a2 = (1.0 - kGamma) / (2.0 - kGamma) * dt;
  for (std::size_t i = 0; i < n; ++i) rhs[i] = mass_[i] * (w_mid * mid[i] - w_old * v[i]);
  std::vector<double> out;
  solve_shifted(a2, rhs, out);
  return out;
}

std::optional<std::vector<double>> HeatStepper::react(std::span<const double> v, double dt) const {
  return react_log(v, std::log(dt));
}

std::optional<std::vector<double>> HeatStepper::react_log(std::span<const double> v, double log_dt) const {
  if (v.size() != grid_.size()) throw std::invalid_argument("field length does not match grid");
  std::vector<double> out(v.begin(), v.end());
  const double log_rate = std::log(p_ - 1.0) + log_dt;
  for (auto& x : out) {
    if (x == 0.0) continue;
    // v (1 - (p-1) |v|^{p-1} dt)^{-1/(p-1)}
    const double log_s = log_rate + (p_ - 1.0) * std::log(std::fabs(x));
    if (log_s >= 0.0) return std::nullopt;
    x *= std::exp(-std::log1p(-std::exp(log_s)) / (p_ - 1.0));
  }
  out.back() = 0.0;
  return out;
}

std::optional<RadialField> HeatStepper::step(const RadialField& state, double dt) const {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (state.values.size() != grid_.size()) throw std::invalid_argument("field length does not match grid");
  auto first = react(state.values, 0.5 * dt);
  if (!first) return std::nullopt;
  auto second = react(diffuse(*first, dt), 0.5 * dt);
  if (!second || !all_finite(*second)) return std::nullopt;
  return RadialField{state.time + dt, std::move(*second)};
}

RadialField integrate_heat(const HeatStepper& stepper, RadialField state, double t_end, double dt_init,
                           double rel_tol) {
  if (!(dt_init > 0.0) || !(rel_tol > 0.0)) throw std::invalid_argument("dt_init and rel_tol must be positive");
  double dt = dt_init;
  while (state.time < t_end) {
    const bool last = dt >= t_end - state.time;
    const double h = last ? t_end - state.time : dt;
    auto res = doubling_step(stepper, state, h, rel_tol);
    if (res.accepted && res.error <= 1.0) {
      state = std::move(*res.accepted);
      if (last) state.time = t_end;
    }
    dt = h * step_factor(res.error);
    if (state.time + dt == state.time) throw NoConvergence("time step collapsed during heat integration");
  }
  return state;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::Blowup:
      return "Blowup";
    case Classification::GlobalDecay:
      return "GlobalDecay";
    case Classification::Undecided:
      return "Undecided";
  }
  return "Undecided";
}

void validate(const EvolutionControls& c) {
  if (!(c.t_max > 0.0) || !(c.dt_init > 0.0) || !(c.decay_threshold > 0.0) || !(c.dt_floor > 0.0) ||
      !(c.rel_tol > 0.0) || !(c.reaction_cap > 0.0)) {
    throw std::invalid_argument("evolution controls must be positive");
  }
  if (!(c.blowup_threshold >= 1e6)) throw std::invalid_argument("blowup_threshold must be at least 1e6");
  if (c.grid_nodes < 3 || c.max_steps == 0) throw std::invalid_argument("grid_nodes >= 3 and max_steps >= 1 required");
}

EvolutionOutcome evolve_classify(const StationarySolution& sol, double lambda, const EvolutionControls& controls) {
  validate(controls);
  if (!std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite");
  const double p = sol.p;
  const HeatStepper stepper(solution_grid(sol.epsilon, controls.grid_nodes), p);
  const auto r = stepper.grid().nodes();

  RadialField state;
  state.values.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) state.values[i] = lambda * sol.value_at(r[i]);
  state.values.back() = 0.0;

  EvolutionOutcome out;
  out.lambda = lambda;
  const double norm0 = sup_norm(state.values);
  out.supnorm_trace.push_back({0.0, norm0});
  if (norm0 == 0.0) {
    // Exact fixed point.
    out.classification = Classification::GlobalDecay;
    return out;
  }

  const double log_dt_floor = std::log(controls.dt_floor) + 2.0 * sol.log_epsilon;
  const double decay_log_bound = std::log(0.5 * kFirstDiskEigenvalue);
  const double log_rate = std::log(stepper.max_diffusion_rate());
  double log_dt = std::log(controls.dt_init) + 2.0 * sol.log_epsilon;

  while (out.steps < controls.max_steps && state.time < controls.t_max) {
    const double m = out.supnorm_trace.back().sup_norm;
    log_dt = std::min({log_dt, std::log(controls.reaction_cap) + log_reaction_lifetime(p, m),
                       std::log(controls.t_max - state.time)});

    const double used = log_dt;
    const double dt = std::exp(log_dt);
    if (log_dt + log_rate < std::log(1e-17) || state.time + dt == state.time) {
      // Diffusion is invisible at this dt; the exact reaction flow is the step.
      // Time may stop advancing in floating point while |v| keeps growing.
      auto next = stepper.react_log(state.values, log_dt);
      if (!next) {
        log_dt -= std::log(2.0);
        continue;
      }
      state.values = std::move(*next);
      state.time += dt;
    } else {
      auto res = doubling_step(stepper, state, dt, controls.rel_tol);
      const double factor = step_factor(res.error);
      log_dt += std::log(factor);
      if (!res.accepted || res.error > 1.0) continue;
      state = std::move(*res.accepted);
    }
    ++out.steps;

    const double m_new = sup_norm(state.values);
    if (state.time > out.supnorm_trace.back().t) {
      out.supnorm_trace.push_back({state.time, m_new});
    } else {
      out.supnorm_trace.back().sup_norm = m_new;
    }

    if (m_new >= controls.blowup_threshold && used < log_dt_floor && m_new > m) {
      out.classification = Classification::Blowup;
      out.blowup_time_estimate = estimate_blowup_time(out.supnorm_trace, p);
      break;
    }
    if (m_new <= controls.decay_threshold * norm0 && tail_nonincreasing(out.supnorm_trace, 5) &&
        (p - 1.0) * std::log(m_new) < decay_log_bound) {
      out.classification = Classification::GlobalDecay;
      break;
    }
  }
  out.final_time = state.time;
  return out;
}

std::vector<EvolutionOutcome> lambda_scan(const StationarySolution& sol, const std::vector<double>& lambdas,
                                          const EvolutionControls& controls) {
  validate(controls);
  for (double l : lambdas) {
    if (!std::isfinite(l)) throw std::invalid_argument("lambda values must be finite");
  }
  std::vector<std::future<EvolutionOutcome>> tasks;
  tasks.reserve(lambdas.size());
  for (double l : lambdas) {
    tasks.push_back(std::async(std::launch::async, [&sol, l, &controls] { return evolve_classify(sol, l, controls); }));
  }
  std::vector<EvolutionOutcome> out;
  out.reserve(tasks.size());
  for (auto& t : tasks) out.push_back(t.get());
  return out;
}

ScanWindow empirical_window(const std::vector<double>& lambdas, const std::vector<EvolutionOutcome>& outcomes) {
  if (lambdas.size() != outcomes.size()) throw std::invalid_argument("one outcome per lambda required");
  ScanWindow w;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double l = lambdas[i];
    const auto c = outcomes[i].classification;
    if (l < 1.0 && c == Classification::GlobalDecay && (!w.below_decay || l > *w.below_decay)) w.below_decay = l;
    if (l > 1.0 && c != Classification::Blowup && (!w.above_not_blowup || l > *w.above_not_blowup)) {
      w.above_not_blowup = l;
    }
  }
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double l = lambdas[i];
    if (outcomes[i].classification != Classification::Blowup) continue;
    if (l < 1.0 && (!w.below_decay || l > *w.below_decay) && (!w.below_blowup || l < *w.below_blowup)) {
      w.below_blowup = l;
    }
    if (l > 1.0 && (!w.above_not_blowup || l > *w.above_not_blowup) && (!w.above_blowup || l < *w.above_blowup)) {
      w.above_blowup = l;
    }
  }
  return w;
}

}  // namespace nodalheat
