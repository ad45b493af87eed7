// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "cece/oracle.hpp"
#include "cece/simulator.hpp"
#include "cece/survival.hpp"
#include "cece/trial_data.hpp"

using namespace cece;

namespace {

constexpr std::size_t kN = 1'000'000;

Execution policy(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

SimulationConfig config() {
  auto c = default_simulation_config();
  c.n = kN;
  return c;
}

const CounterfactualTable& point_trial() {
  static const auto t = simulate_point_trial(config());
  return t;
}

const CounterfactualTable& survival_trial() {
  static const auto t = simulate_survival_trial(config());
  return t;
}

void BM_SimulatePoint(benchmark::State& state) {
  const auto c = config();
  for (auto _ : state) benchmark::DoNotOptimize(simulate_point_trial(c, policy(state)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kN));
}

void BM_SimulateSurvival(benchmark::State& state) {
  const auto c = config();
  for (auto _ : state) benchmark::DoNotOptimize(simulate_survival_trial(c, policy(state)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kN));
}

void BM_SummarizeArms(benchmark::State& state) {
  const auto& t = point_trial();
  for (auto _ : state) benchmark::DoNotOptimize(summarize_arms(t.observed, policy(state)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kN));
}

void BM_EventTable(benchmark::State& state) {
  const auto& t = survival_trial();
  for (auto _ : state) benchmark::DoNotOptimize(build_event_table(t.observed, policy(state)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kN));
}

void BM_PointOracle(benchmark::State& state) {
  const auto& t = point_trial();
  for (auto _ : state) benchmark::DoNotOptimize(oracle_point_effects(t, policy(state)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kN));
}

}  // namespace

BENCHMARK(BM_SimulatePoint)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SimulateSurvival)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SummarizeArms)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EventTable)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PointOracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
