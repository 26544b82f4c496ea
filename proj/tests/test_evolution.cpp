#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "nodalheat/evolution.hpp"
#include "nodalheat/spectral.hpp"
#include "support.hpp"

using namespace nodalheat;
using nodalheat::testing::bessel_j0_root;
using nodalheat::testing::solution;

namespace {

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

void expect_trace_invariants(const EvolutionOutcome& o, const EvolutionControls& c) {
  ASSERT_FALSE(o.supnorm_trace.empty());
  for (std::size_t i = 1; i < o.supnorm_trace.size(); ++i) {
    ASSERT_GT(o.supnorm_trace[i].t, o.supnorm_trace[i - 1].t) << i;
  }
  const auto& last = o.supnorm_trace.back();
  EXPECT_EQ(last.t, o.final_time);
  if (o.classification == Classification::Blowup) {
    ASSERT_TRUE(o.blowup_time_estimate.has_value());
    EXPECT_GE(*o.blowup_time_estimate, o.final_time);
    EXPECT_GE(last.sup_norm, c.blowup_threshold);
    EXPECT_GT(last.sup_norm, o.supnorm_trace[o.supnorm_trace.size() - 2].sup_norm);
  } else {
    EXPECT_FALSE(o.blowup_time_estimate.has_value());
  }
  if (o.classification == Classification::GlobalDecay) {
    EXPECT_LE(last.sup_norm, c.decay_threshold * o.supnorm_trace.front().sup_norm);
  }
}

}  // namespace

TEST(Stepper, ZeroIsAFixedPoint) {
  const HeatStepper stepper(make_uniform_grid(201, 1.0), 5.0);
  RadialField state{0.0, std::vector<double>(201, 0.0)};
  for (int k = 0; k < 10; ++k) {
    auto next = stepper.step(state, 1e-3);
    ASSERT_TRUE(next.has_value());
    state = std::move(*next);
  }
  for (double v : state.values) EXPECT_EQ(v, 0.0);
}

TEST(Stepper, RejectsNonpositiveStep) {
  const HeatStepper stepper(make_uniform_grid(11, 1.0), 3.0);
  const RadialField state{0.0, std::vector<double>(11, 0.0)};
  EXPECT_THROW((void)stepper.step(state, 0.0), std::invalid_argument);
  EXPECT_THROW((void)stepper.step(state, -1.0), std::invalid_argument);
  EXPECT_THROW(HeatStepper(make_uniform_grid(11, 2.0), 3.0), std::invalid_argument);
}

TEST(Stepper, NonFiniteStepIsRejected) {
  const HeatStepper stepper(make_uniform_grid(11, 1.0), 3.0);
  std::vector<double> v(11, 0.0);
  v[0] = 10.0;
  // The pure reaction from 10 blows up at t = 1 / (2 * 100).
  EXPECT_FALSE(stepper.step({0.0, v}, 1.0).has_value());
}

TEST(Stepper, ReactionMatchesClosedForm) {
  const double p = 4.0;
  const HeatStepper stepper(make_uniform_grid(5, 1.0), p);
  const std::vector<double> v{0.5, -0.3, 0.0, 0.2, 0.0};
  const double dt = 0.7;
  const auto out = stepper.react(v, dt);
  ASSERT_TRUE(out.has_value());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double exact = v[i] == 0.0 ? 0.0
                                     : std::copysign(std::pow(std::pow(std::fabs(v[i]), 1 - p) - (p - 1) * dt, 1 / (1 - p)), v[i]);
    EXPECT_NEAR((*out)[i], exact, 1e-14);
  }
  const auto tiny = stepper.react_log(v, std::log(dt));
  ASSERT_TRUE(tiny.has_value());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR((*tiny)[i], (*out)[i], 1e-14);
}

TEST(Stepper, DiffusionObeysMaximumPrinciple) {
  const HeatStepper stepper(make_uniform_grid(401, 1.0), 3.0);
  std::vector<double> v;
  for (double r : stepper.grid().nodes()) v.push_back(std::cos(7.0 * r) * (1.0 - r * r));
  const double before = sup_norm(v);
  for (double dt : {1e-6, 1e-4, 1e-2, 1.0}) EXPECT_LE(sup_norm(stepper.diffuse(v, dt)), before) << "dt = " << dt;
}

TEST(Stepper, LinearDecayRate) {
  const auto grid = make_uniform_grid(2001, 1.0);
  const auto phi = first_eigenpair(assemble(grid, std::vector<double>(grid.size(), 0.0))).eigenfunction;
  const double delta = 1e-6;
  RadialField state{0.0, {}};
  for (double f : phi) state.values.push_back(delta * f / phi[0]);
  const HeatStepper stepper(grid, 3.0);
  const auto out = integrate_heat(stepper, state, 0.1, 1e-4, 1e-9);
  const double j01 = bessel_j0_root();
  const double expected = std::exp(-j01 * j01 * 0.1);
  EXPECT_NEAR(out.time, 0.1, 1e-15);
  EXPECT_NEAR(sup_norm(out.values) / delta / expected, 1.0, 0.02);
}

TEST(Stepper, StationaryDrift) {
  auto drift = [](std::size_t n) {
    const auto& sol = solution(3.0, 1);
    const auto grid = make_uniform_grid(n, 1.0);
    RadialField state{0.0, {}};
    for (double r : grid.nodes()) state.values.push_back(sol.value_at(r));
    state.values.back() = 0.0;
    const auto out = integrate_heat(HeatStepper(grid, 3.0), state, 0.01, 1e-5, 1e-10);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::fabs(out.values[i] - state.values[i]));
    return std::pair{d, grid.max_spacing()};
  };
  const auto [d1, h1] = drift(501);
  const auto [d2, h2] = drift(1001);
  RecordProperty("drift_constant_coarse", std::to_string(d1 / (h1 * h1)));
  RecordProperty("drift_constant_fine", std::to_string(d2 / (h2 * h2)));
  EXPECT_LE(d1, 1e3 * h1 * h1);
  EXPECT_LE(d2, 1e3 * h2 * h2);
  EXPECT_LT(d2, d1);
}

TEST(Controls, Validation) {
  EvolutionControls c;
  EXPECT_NO_THROW(validate(c));
  c.blowup_threshold = 1e5;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.t_max = 0.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.dt_floor = -1.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.grid_nodes = 2;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Classify, ZeroDataDecaysExactly) {
  const auto o = evolve_classify(solution(30.0, 2), 0.0);
  EXPECT_EQ(o.classification, Classification::GlobalDecay);
  EXPECT_EQ(o.supnorm_trace.back().sup_norm, 0.0);
}

TEST(Classify, SmallMultipleDecays) {
  const EvolutionControls c;
  const auto o = evolve_classify(solution(30.0, 2), 0.1, c);
  EXPECT_EQ(o.classification, Classification::GlobalDecay);
  expect_trace_invariants(o, c);
}

TEST(Classify, LargeMultipleBlowsUp) {
  const EvolutionControls c;
  const auto o = evolve_classify(solution(30.0, 2), 3.0, c);
  EXPECT_EQ(o.classification, Classification::Blowup);
  expect_trace_invariants(o, c);
}

TEST(Classify, JustAboveOneBlowsUpAtLargeP) {
  const EvolutionControls c;
  const auto& sol = solution(200.0, 2);
  const auto o = evolve_classify(sol, 1.01, c);
  EXPECT_EQ(o.classification, Classification::Blowup);
  expect_trace_invariants(o, c);
  // The blowup happens on the eps^2 time scale of the stationary state.
  EXPECT_LT(*o.blowup_time_estimate, 1e3 * std::exp(2.0 * sol.log_epsilon));
}

TEST(Classify, VerdictStableUnderRefinement) {
  EvolutionControls fine;
  fine.dt_init *= 0.5;
  fine.grid_nodes = 2 * fine.grid_nodes - 1;
  for (auto [p, lambda, expected] : {std::tuple{30.0, 0.1, Classification::GlobalDecay},
                                     {30.0, 3.0, Classification::Blowup},
                                     {200.0, 1.01, Classification::Blowup}}) {
    const auto o = evolve_classify(solution(p, 2), lambda, fine);
    EXPECT_EQ(o.classification, expected) << "p = " << p << " lambda = " << lambda;
  }
}

TEST(Scan, OutcomesInInputOrder) {
  const auto& sol = solution(30.0, 2);
  const std::vector<double> lambdas{3.0, 0.1};
  const auto out = lambda_scan(sol, lambdas);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].lambda, 3.0);
  EXPECT_EQ(out[0].classification, Classification::Blowup);
  EXPECT_EQ(out[1].lambda, 0.1);
  EXPECT_EQ(out[1].classification, Classification::GlobalDecay);
  const auto w = empirical_window(lambdas, out);
  EXPECT_EQ(w.below_decay, 0.1);
  EXPECT_FALSE(w.below_blowup.has_value());
  EXPECT_EQ(w.above_blowup, 3.0);
  EXPECT_FALSE(w.above_not_blowup.has_value());
}
