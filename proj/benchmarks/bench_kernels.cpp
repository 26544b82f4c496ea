#include <cmath>
#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "nodalheat/evolution.hpp"
#include "nodalheat/grid.hpp"
#include "nodalheat/liouville.hpp"
#include "nodalheat/shooting.hpp"
#include "nodalheat/spectral.hpp"

using namespace nodalheat;

static void BM_Shooting(benchmark::State& state) {
  const double p = static_cast<double>(state.range(0));
  const int K = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_lane_emden(p, K));
}
BENCHMARK(BM_Shooting)->Args({20, 1})->Args({200, 1})->Args({200, 3})->Unit(benchmark::kMicrosecond);

static void BM_StationarySolution(benchmark::State& state) {
  const auto nodes = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(stationary_solution(100.0, 2, nodes));
}
BENCHMARK(BM_StationarySolution)->Arg(4001)->Arg(20001)->Unit(benchmark::kMillisecond);

static void BM_DiskQuadrature(benchmark::State& state) {
  const auto g = make_graded_grid(static_cast<std::size_t>(state.range(0)), 1.0, 1e-6);
  std::vector<double> f;
  for (double r : g.nodes()) f.push_back(exp_z_star(r * 1e6));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_disk(g, f));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DiskQuadrature)->Arg(4001)->Arg(20001);

static void BM_LinearizedEigenpair(benchmark::State& state) {
  const auto sol = stationary_solution(100.0, 2, static_cast<std::size_t>(state.range(0)));
  const auto op = linearized_operator(sol);
  for (auto _ : state) benchmark::DoNotOptimize(first_eigenpair(op));
}
BENCHMARK(BM_LinearizedEigenpair)->Arg(4001)->Arg(20001)->Unit(benchmark::kMillisecond);

static void BM_LimitEigenpair(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(limit_eigenpair(40.0, 8001));
}
BENCHMARK(BM_LimitEigenpair)->Unit(benchmark::kMillisecond);

static void BM_HeatStep(benchmark::State& state) {
  const auto g = make_uniform_grid(static_cast<std::size_t>(state.range(0)), 1.0);
  const HeatStepper stepper(g, 3.0);
  RadialField field;
  for (double r : g.nodes()) field.values.push_back(std::cos(0.5 * std::numbers::pi * r));
  for (auto _ : state) benchmark::DoNotOptimize(stepper.step(field, 1e-5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HeatStep)->Arg(2001)->Arg(8001);

BENCHMARK_MAIN();
