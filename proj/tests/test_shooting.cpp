#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "nodalheat/errors.hpp"
#include "nodalheat/shooting.hpp"
#include "support.hpp"

using namespace nodalheat;
using nodalheat::testing::solution;

namespace {

/// Fixed-step RK4 in s for w'' = -w'/s - |w|^{p-1} w, started from the
/// series at s0 = 1e-3. Returns the first zero by linear interpolation.
double rk4_first_zero(double p, double h) {
  auto f = [p](double s, double w, double dw, double& a) { a = -dw / s - std::pow(std::fabs(w), p - 1.0) * w; };
  double s = 1e-3;
  double w = 1.0 - s * s / 4.0 + p * std::pow(s, 4) / 64.0;
  double dw = -s / 2.0 + p * std::pow(s, 3) / 16.0;
  while (true) {
    double a1, a2, a3, a4;
    f(s, w, dw, a1);
    f(s + h / 2, w + h / 2 * dw, dw + h / 2 * a1, a2);
    f(s + h / 2, w + h / 2 * (dw + h / 2 * a1), dw + h / 2 * a2, a3);
    f(s + h, w + h * (dw + h / 2 * a2), dw + h * a3, a4);
    const double w_new = w + h * dw + h * h / 6.0 * (a1 + a2 + a3);
    const double dw_new = dw + h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
    if (w_new <= 0.0) return s + h * w / (w - w_new);
    s += h;
    w = w_new;
    dw = dw_new;
  }
}

int sign_regions(const StationarySolution& sol) {
  int regions = 1;
  for (std::size_t i = 1; i + 1 < sol.values.size(); ++i) {
    if (sol.values[i] * sol.values[i - 1] < 0.0) ++regions;
  }
  return regions;
}

struct Residual {
  double worst = 0.0;
  /// Leading truncation term of the central differences, from the fourth
  /// and third differences of the same samples.
  double truncation = 0.0;
};

Residual ode_residual(double p, int K, std::size_t n) {
  const auto sol = stationary_solution(p, K, make_uniform_grid(n, 1.0));
  const auto r = sol.grid.nodes();
  const auto& u = sol.values;
  const double h = r[1] - r[0];
  Residual out;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double upp = (u[i + 1] - 2 * u[i] + u[i - 1]) / (h * h);
    const double up = (u[i + 1] - u[i - 1]) / (2 * h);
    out.worst = std::max(out.worst, std::fabs(upp + up / r[i] + std::pow(std::fabs(u[i]), p - 1) * u[i]));
    const double d4 = (u[i + 2] - 4 * u[i + 1] + 6 * u[i] - 4 * u[i - 1] + u[i - 2]) / std::pow(h, 4);
    const double d3 = (u[i + 2] - 2 * u[i + 1] + 2 * u[i - 1] - u[i - 2]) / (2 * std::pow(h, 3));
    out.truncation = std::max(out.truncation, h * h / 12 * std::fabs(d4) + h * h / 6 * std::fabs(d3) / r[i]);
  }
  return out;
}

}  // namespace

TEST(Shooting, SeriesNearOrigin) {
  const auto traj = integrate_lane_emden(3.0, 1);
  EXPECT_EQ(traj.value(0.0), 1.0);
  EXPECT_EQ(traj.slope(0.0), 0.0);
  for (double s : {1e-4, 1e-3, 1e-2}) {
    EXPECT_NEAR(traj.value(s), 1.0 - s * s / 4.0, 3.0 * std::pow(s, 4) / 64.0 + 1e-12);
    EXPECT_LT(traj.slope(s), 0.0);
  }
}

TEST(Shooting, FirstZeroMatchesFixedStepRk4) {
  const double oracle = rk4_first_zero(3.0, 1e-6);
  const auto traj = integrate_lane_emden(3.0, 1);
  const double rho1 = std::exp(traj.log_zeros()[0]);
  EXPECT_NEAR(rho1 / oracle - 1.0, 0.0, 1e-8) << "rk4 " << oracle << " shooting " << rho1;
}

TEST(Shooting, SignAlternatesBetweenZeros) {
  for (double p : {2.0, 7.0, 60.0}) {
    const auto traj = integrate_lane_emden(p, 4);
    const auto z = traj.log_zeros();
    ASSERT_EQ(z.size(), 4u);
    double expected = 1.0;
    double left = traj.start_log_radius();
    for (double right : z) {
      const double mid = 0.5 * (left + right);
      EXPECT_GT(expected * traj.value_at_log(mid), 0.0) << "p = " << p;
      expected = -expected;
      left = right;
    }
  }
}

TEST(Shooting, RejectsBadArguments) {
  EXPECT_THROW(integrate_lane_emden(1.0, 1), std::invalid_argument);
  EXPECT_THROW(integrate_lane_emden(3.0, 0), std::invalid_argument);
  ShootingControls tight;
  tight.log_max_radius = 0.1;
  EXPECT_THROW(integrate_lane_emden(3.0, 1, tight), NoConvergence);
  EXPECT_THROW(stationary_solution(3.0, 1, make_uniform_grid(11, 2.0)), std::invalid_argument);
}

TEST(Shooting, EnergyIsNonincreasing) {
  for (double p : {3.0, 50.0}) {
    const auto traj = integrate_lane_emden(p, 3);
    double previous = std::numeric_limits<double>::infinity();
    for (const auto& smp : traj.samples()) {
      const double ds = smp.dw * std::exp(-smp.t);
      const double F = 0.5 * ds * ds + std::pow(std::fabs(smp.w), p + 1) / (p + 1);
      EXPECT_LE(F, previous * (1.0 + 1e-9)) << "p = " << p << " t = " << smp.t;
      previous = F;
    }
  }
}

TEST(Shooting, ScaledTrajectorySolvesOde) {
  const double p = 5.0, lambda = 3.7;
  const auto traj = integrate_lane_emden(p, 2);
  const double a = 2.0 / (p - 1.0);
  auto v = [&](double r) { return std::pow(lambda, a) * traj.value(lambda * r); };
  auto dv = [&](double r) { return std::pow(lambda, a + 1) * traj.slope(lambda * r); };
  const double h = 1e-5;
  for (double r : {0.05, 0.3, 0.8}) {
    const double d2 = (dv(r + h) - dv(r - h)) / (2 * h);
    const double res = d2 + dv(r) / r + std::pow(std::fabs(v(r)), p - 1) * v(r);
    EXPECT_NEAR(res, 0.0, 1e-6 * std::pow(lambda, a + 2));
  }
}

TEST(Stationary, BasicInvariants) {
  for (auto [p, K] : {std::pair{3.0, 1}, {20.0, 2}, {50.0, 3}, {200.0, 2}}) {
    const auto& sol = solution(p, K);
    EXPECT_EQ(sol.values.front(), sol.amplitude);
    EXPECT_GT(sol.amplitude, 0.0);
    EXPECT_EQ(sol.values.back(), 0.0);
    EXPECT_EQ(sign_regions(sol), K);
    double sup = 0.0;
    for (double u : sol.values) sup = std::max(sup, std::fabs(u));
    EXPECT_EQ(sup, sol.amplitude);
    EXPECT_NEAR(-2.0 * sol.log_epsilon, std::log(p) + (p - 1.0) * std::log(sol.amplitude), 1e-12 * p);
    ASSERT_EQ(sol.nodal_radii.size(), static_cast<std::size_t>(K - 1));
    for (std::size_t j = 0; j < sol.nodal_radii.size(); ++j) {
      EXPECT_GT(sol.nodal_radii[j], 0.0);
      EXPECT_LT(sol.nodal_radii[j], 1.0);
      if (j > 0) EXPECT_GT(sol.nodal_radii[j], sol.nodal_radii[j - 1]);
    }
  }
}

TEST(Stationary, SignChangesSitAtNodalRadii) {
  const auto& sol = solution(20.0, 3);
  const auto r = sol.grid.nodes();
  std::size_t j = 0;
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    if (sol.values[i] * sol.values[i - 1] < 0.0) {
      ASSERT_LT(j, sol.nodal_radii.size());
      EXPECT_LE(r[i - 1], sol.nodal_radii[j]);
      EXPECT_GE(r[i], sol.nodal_radii[j]);
      ++j;
    }
  }
  EXPECT_EQ(j, sol.nodal_radii.size());
}

TEST(Stationary, GroundStateAmplitudeNearSqrtE) {
  EXPECT_NEAR(solution(100.0, 1).amplitude / std::sqrt(std::numbers::e), 1.0, 0.05);
}

TEST(Stationary, NodalAmplitudeDominatesTwoNodal) {
  for (double p : {20.0, 50.0, 100.0}) {
    const double base = solution(p, 2).amplitude;
    EXPECT_GT(solution(p, 3).amplitude, base) << "p = " << p;
    EXPECT_GT(solution(p, 4).amplitude, base) << "p = " << p;
  }
}

TEST(Stationary, ScalingRelationReproducesGroundState) {
  const double p = 50.0;
  for (int K : {2, 3}) {
    const auto& sol = solution(p, K);
    const auto ground = stationary_solution(p, 1, make_uniform_grid(2001, 1.0));
    const double r1 = sol.nodal_radii[0];
    double gap = 0.0;
    for (std::size_t i = 0; i < ground.grid.size(); ++i) {
      const double r = ground.grid.nodes()[i];
      gap = std::max(gap, std::fabs(std::pow(r1, 2.0 / (p - 1.0)) * sol.value_at(r1 * r) - ground.values[i]));
    }
    EXPECT_LE(gap, 1e-6) << "K = " << K;
  }
}

TEST(Stationary, OdeResidualIsSecondOrder) {
  // Uniform grids only resolve the core when eps is several spacings wide,
  // so the cases stay at small p.
  for (auto [p, K] : {std::pair{2.0, 3}, {3.0, 2}, {4.0, 2}, {5.0, 3}}) {
    const auto coarse = ode_residual(p, K, 1001);
    const auto fine = ode_residual(p, K, 2001);
    EXPECT_LE(coarse.worst, 10.0 * coarse.truncation) << "p = " << p << " K = " << K;
    EXPECT_LE(fine.worst, 10.0 * fine.truncation) << "p = " << p << " K = " << K;
    EXPECT_GE(std::log2(coarse.worst / fine.worst), 1.8) << "p = " << p << " K = " << K;
  }
}

TEST(LocalMaxima, GroundStateHasOnePeak) {
  const auto& sol = solution(30.0, 1);
  const auto m = local_maxima(sol);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0], sol.amplitude);
}

TEST(LocalMaxima, DecreasingWithSecondBelowHalf) {
  const auto& sol = solution(50.0, 3);
  const auto m = local_maxima(sol);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[0], sol.amplitude);
  EXPECT_GT(m[0], m[1]);
  EXPECT_GT(m[1], m[2]);
  const auto two = local_maxima(solution(50.0, 2));
  EXPECT_LT(two[1] / two[0], 0.5);
}

TEST(Epsilon, Definition) {
  StationarySolution unit;
  unit.p = 17.0;
  unit.amplitude = 1.0;
  EXPECT_DOUBLE_EQ(epsilon_of(unit), 1.0 / std::sqrt(17.0));
  const auto& sol = solution(100.0, 1);
  EXPECT_NEAR(epsilon_of(sol) / sol.epsilon, 1.0, 1e-12);
  EXPECT_NEAR(1.0 / (sol.epsilon * sol.epsilon), 100.0 * std::pow(sol.amplitude, 99.0), 1e-10 * 100.0 * std::pow(sol.amplitude, 99.0));
}

TEST(Epsilon, ShrinksRelativeToFirstNode) {
  double previous = std::numeric_limits<double>::infinity();
  for (double p : {20.0, 50.0, 100.0, 200.0}) {
    const auto& sol = solution(p, 2);
    const double log_ratio = sol.log_epsilon - std::log(sol.nodal_radii[0]);
    EXPECT_LT(log_ratio, previous) << "p = " << p;
    previous = log_ratio;
  }
}
