#include "nodalheat/shooting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nodalheat/errors.hpp"

namespace nodalheat {

namespace {

// |w|^{p-1} w * exp(2t), computed without forming |w|^p.
double reaction_term(double t, double w, double p) {
  const double a = std::fabs(w);
  if (a < 1e-300) return 0.0;
  const double log_mag = std::min(2.0 * t + p * std::log(a), 700.0);
  return std::copysign(std::exp(log_mag), w);
}

// Quintic Hermite basis on [0, 1] (values, first and second derivatives).
struct Hermite5 {
  std::array<double, 6> v, d, dd;
  explicit Hermite5(double s) {
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    v = {1 - 10 * s3 + 15 * s4 - 6 * s5,
         s - 6 * s3 + 8 * s4 - 3 * s5,
         0.5 * (s2 - 3 * s3 + 3 * s4 - s5),
         10 * s3 - 15 * s4 + 6 * s5,
         -4 * s3 + 7 * s4 - 3 * s5,
         0.5 * (s3 - 2 * s4 + s5)};
    d = {-30 * s2 + 60 * s3 - 30 * s4,
         1 - 18 * s2 + 32 * s3 - 15 * s4,
         0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4),
         30 * s2 - 60 * s3 + 30 * s4,
         -12 * s2 + 28 * s3 - 15 * s4,
         0.5 * (3 * s2 - 8 * s3 + 5 * s4)};
    dd = {-60 * s + 180 * s2 - 120 * s3,
          -36 * s + 96 * s2 - 60 * s3,
          0.5 * (2 - 18 * s + 36 * s2 - 20 * s3),
          60 * s - 180 * s2 + 120 * s3,
          -24 * s + 84 * s2 - 60 * s3,
          0.5 * (6 * s - 24 * s2 + 20 * s3)};
  }
};

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

using State = std::array<double, 2>;

}  // namespace

LaneEmdenTrajectory::LaneEmdenTrajectory(double p, std::vector<Sample> samples, std::vector<double> log_zeros)
    : p_(p), samples_(std::move(samples)), log_zeros_(std::move(log_zeros)) {
  if (samples_.size() < 2) throw std::invalid_argument("trajectory needs at least two samples");
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].t > samples_[i - 1].t)) {
      throw std::invalid_argument("trajectory samples must be strictly increasing in log-radius");
    }
  }
}

double LaneEmdenTrajectory::curvature(double t, double w) const { return -reaction_term(t, w, p_); }

std::size_t LaneEmdenTrajectory::segment_of(double t) const {
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](double value, const Sample& s) { return value < s.t; });
  if (it == samples_.begin()) return 0;
  const auto idx = static_cast<std::size_t>(std::distance(samples_.begin(), it)) - 1;
  return std::min(idx, samples_.size() - 2);
}

double LaneEmdenTrajectory::value_at_log(double t) const {
  if (t < samples_.front().t) {
    const double s2 = std::exp(2.0 * t);
    return 1.0 - 0.25 * s2 + p_ * s2 * s2 / 64.0;
  }
  const auto i = segment_of(t);
  const Sample& a = samples_[i];
  const Sample& b = samples_[i + 1];
  const double h = b.t - a.t;
  const Hermite5 H((t - a.t) / h);
  return H.v[0] * a.w + H.v[1] * h * a.dw + H.v[2] * h * h * curvature(a.t, a.w) + H.v[3] * b.w +
         H.v[4] * h * b.dw + H.v[5] * h * h * curvature(b.t, b.w);
}

double LaneEmdenTrajectory::log_slope_at_log(double t) const {
  if (t < samples_.front().t) {
    const double s2 = std::exp(2.0 * t);
    return -0.5 * s2 + p_ * s2 * s2 / 16.0;
  }
  const auto i = segment_of(t);
  const Sample& a = samples_[i];
  const Sample& b = samples_[i + 1];
  const double h = b.t - a.t;
  const Hermite5 H((t - a.t) / h);
  return (H.d[0] * a.w + H.d[1] * h * a.dw + H.d[2] * h * h * curvature(a.t, a.w) + H.d[3] * b.w +
          H.d[4] * h * b.dw + H.d[5] * h * h * curvature(b.t, b.w)) /
         h;
}

double LaneEmdenTrajectory::value(double s) const {
  if (s < 0.0) throw std::invalid_argument("radius must be nonnegative");
  if (s == 0.0) return 1.0;
  return value_at_log(std::log(s));
}

double LaneEmdenTrajectory::slope(double s) const {
  if (s < 0.0) throw std::invalid_argument("radius must be nonnegative");
  if (s == 0.0) return 0.0;
  return log_slope_at_log(std::log(s)) / s;
}

double LaneEmdenTrajectory::max_abs_between(double t_a, double t_b) const {
  double best = std::max(std::fabs(value_at_log(t_a)), std::fabs(value_at_log(t_b)));
  // Scan sample endpoints for a sign change of w_t and refine each by bisection.
  std::size_t i0 = segment_of(t_a);
  std::size_t i1 = segment_of(t_b) + 1;
  for (std::size_t i = i0; i + 1 <= i1 && i + 1 < samples_.size(); ++i) {
    double lo = std::max(samples_[i].t, t_a);
    double hi = std::min(samples_[i + 1].t, t_b);
    if (!(hi > lo)) continue;
    double flo = log_slope_at_log(lo);
    const double fhi = log_slope_at_log(hi);
    best = std::max(best, std::fabs(value_at_log(hi)));
    if (flo * fhi > 0.0) continue;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = log_slope_at_log(mid);
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    best = std::max(best, std::fabs(value_at_log(0.5 * (lo + hi))));
  }
  return best;
}

LaneEmdenTrajectory integrate_lane_emden(double p, int zero_target, const ShootingControls& controls) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent p must exceed 1");
  if (zero_target < 1) throw std::invalid_argument("zero target must be at least 1");
  if (!(controls.start_radius > 0.0) || !(controls.abs_tol > 0.0) || !(controls.rel_tol > 0.0)) {
    throw std::invalid_argument("shooting controls must be positive");
  }

  auto rhs = [p](double t, const State& y) -> State { return {y[1], -reaction_term(t, y[0], p)}; };

  const double r0 = controls.start_radius;
  double t = std::log(r0);
  State y{1.0 - 0.25 * r0 * r0 + p * std::pow(r0, 4) / 64.0, -0.5 * r0 * r0 + p * std::pow(r0, 4) / 16.0};

  std::vector<LaneEmdenTrajectory::Sample> samples{{t, y[0], y[1]}};
  std::vector<double> zeros;

  double h = 1e-2;
  double err_prev = 1e-4;
  State k1 = rhs(t, y);

  for (std::size_t step = 0;; ++step) {
    if (step >= controls.max_steps) {
      throw NoConvergence("Lane-Emden shooting exceeded " + std::to_string(controls.max_steps) +
                          " steps after " + std::to_string(zeros.size()) + " zeros");
    }
    if (t > controls.log_max_radius) {
      throw NoConvergence("Lane-Emden shooting found only " + std::to_string(zeros.size()) + " of " +
                          std::to_string(zero_target) + " zeros before log(r) = " +
                          std::to_string(controls.log_max_radius));
    }
    h = std::min(h, controls.max_log_step);

    State tmp;
    for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    const State k2 = rhs(t + c2 * h, tmp);
    for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    const State k3 = rhs(t + c3 * h, tmp);
    for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const State k4 = rhs(t + c4 * h, tmp);
    for (int i = 0; i < 2; ++i) {
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    }
    const State k5 = rhs(t + c5 * h, tmp);
    for (int i = 0; i < 2; ++i) {
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    const State k6 = rhs(t + h, tmp);
    State ynew;
    for (int i = 0; i < 2; ++i) {
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    }
    const State k7 = rhs(t + h, ynew);

    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = controls.abs_tol + controls.rel_tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / 2.0);

    if (!std::isfinite(err)) {
      h *= 0.25;
      continue;
    }
    if (err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      continue;
    }

    // Accepted.
    const double t_new = t + h;
    samples.push_back({t_new, ynew[0], ynew[1]});

    if (y[0] * ynew[0] <= 0.0 && ynew[0] != y[0]) {
      // Refine the zero on this segment's Hermite interpolant.
      const std::size_t n = samples.size();
      LaneEmdenTrajectory seg(p, {samples[n - 2], samples[n - 1]}, {});
      double lo = t, hi = t_new;
      double flo = y[0];
      double root = (ynew[0] == 0.0) ? t_new : lo;
      if (ynew[0] != 0.0) {
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = seg.value_at_log(mid);
          if (fm == 0.0) {
            lo = hi = mid;
            break;
          }
          if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
          if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(mid))) break;
        }
        root = 0.5 * (lo + hi);
      }
      if (zeros.empty() || root > zeros.back()) zeros.push_back(root);
      if (static_cast<int>(zeros.size()) >= zero_target) {
        return LaneEmdenTrajectory(p, std::move(samples), std::move(zeros));
      }
    }

    t = t_new;
    y = ynew;
    k1 = k7;

    const double e = std::max(err, 1e-10);
    double fac = 0.9 * std::pow(e, -0.17) * std::pow(err_prev, 0.04);
    fac = std::clamp(fac, 0.2, 10.0);
    h *= fac;
    err_prev = e;
  }
}

// ---------------------------------------------------------------------------

double StationarySolution::value_at(double r) const {
  if (r < 0.0) throw std::invalid_argument("radius must be nonnegative");
  if (r >= 1.0) return 0.0;
  if (r == 0.0) return amplitude;
  return amplitude * trajectory.value_at_log(std::log(r) + log_outer_zero);
}

double StationarySolution::derivative_at(double r) const {
  if (r < 0.0) throw std::invalid_argument("radius must be nonnegative");
  if (r > 1.0 || r == 0.0) return 0.0;
  return amplitude * trajectory.log_slope_at_log(std::log(r) + log_outer_zero) / r;
}

double StationarySolution::normalized_at_rescaled(double x) const {
  if (x < 0.0) throw std::invalid_argument("radius must be nonnegative");
  if (x == 0.0) return 1.0;
  const double t = std::log(x) - 0.5 * std::log(p);
  if (t >= log_outer_zero) return 0.0;
  return trajectory.value_at_log(t);
}

double StationarySolution::normalized_slope_at_rescaled(double x) const {
  if (x < 0.0) throw std::invalid_argument("radius must be nonnegative");
  if (x == 0.0) return 0.0;
  const double t = std::log(x) - 0.5 * std::log(p);
  if (t > log_outer_zero) return 0.0;
  return trajectory.log_slope_at_log(t) / x;
}

double StationarySolution::rescaled_radius() const { return std::exp(-log_epsilon); }

RadialGrid solution_grid(double epsilon, std::size_t node_count) {
  return make_graded_grid(node_count, 1.0, epsilon);
}

StationarySolution assemble_solution(double p, int K, LaneEmdenTrajectory trajectory, const RadialGrid& grid) {
  if (K < 1) throw std::invalid_argument("nodal region count K must be at least 1");
  if (std::fabs(grid.outer_radius() - 1.0) > 1e-15) {
    throw std::invalid_argument("stationary solutions live on the unit disk (outer radius 1)");
  }
  const auto zeros = trajectory.log_zeros();
  if (zeros.size() < static_cast<std::size_t>(K)) {
    throw std::invalid_argument("trajectory has fewer zeros than nodal regions requested");
  }

  StationarySolution sol;
  sol.p = p;
  sol.K = K;
  sol.grid = grid;
  sol.log_outer_zero = zeros[static_cast<std::size_t>(K - 1)];
  sol.amplitude = std::exp(2.0 * sol.log_outer_zero / (p - 1.0));
  sol.log_epsilon = -0.5 * std::log(p) - sol.log_outer_zero;
  sol.epsilon = std::exp(sol.log_epsilon);
  for (int j = 0; j + 1 < K; ++j) {
    sol.nodal_radii.push_back(std::exp(zeros[static_cast<std::size_t>(j)] - sol.log_outer_zero));
  }
  sol.trajectory = std::move(trajectory);

  const auto r = grid.nodes();
  sol.values.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) sol.values[i] = sol.value_at(r[i]);
  sol.values.back() = 0.0;
  return sol;
}

StationarySolution stationary_solution(double p, int K, const RadialGrid& grid, const ShootingControls& controls) {
  if (K < 1) throw std::invalid_argument("nodal region count K must be at least 1");
  if (std::fabs(grid.outer_radius() - 1.0) > 1e-15) {
    throw std::invalid_argument("stationary solutions live on the unit disk (outer radius 1)");
  }
  return assemble_solution(p, K, integrate_lane_emden(p, K, controls), grid);
}

StationarySolution stationary_solution(double p, int K, std::size_t node_count, const ShootingControls& controls) {
  if (K < 1) throw std::invalid_argument("nodal region count K must be at least 1");
  auto trajectory = integrate_lane_emden(p, K, controls);
  const double log_eps = -0.5 * std::log(p) - trajectory.log_zeros()[static_cast<std::size_t>(K - 1)];
  return assemble_solution(p, K, std::move(trajectory), solution_grid(std::exp(log_eps), node_count));
}

std::vector<double> local_maxima(const StationarySolution& sol) {
  std::vector<double> m{sol.amplitude};
  const auto zeros = sol.trajectory.log_zeros();
  for (int j = 1; j < sol.K; ++j) {
    const double peak = sol.trajectory.max_abs_between(zeros[static_cast<std::size_t>(j - 1)],
                                                       zeros[static_cast<std::size_t>(j)]);
    m.push_back(sol.amplitude * peak);
  }
  return m;
}

double epsilon_of(const StationarySolution& sol) {
  return std::exp(-0.5 * (std::log(sol.p) + (sol.p - 1.0) * std::log(sol.amplitude)));
}

}  // namespace nodalheat
