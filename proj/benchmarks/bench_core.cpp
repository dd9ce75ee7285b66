#include <pdhj/characteristics.hpp>
#include <pdhj/classical.hpp>
#include <pdhj/control.hpp>
#include <pdhj/functional.hpp>
#include <pdhj/lyapunov.hpp>
#include <pdhj/sampling.hpp>
#include <pdhj/scenario.hpp>
#include <pdhj/value.hpp>

#include "fixtures.hpp"

#include <benchmark/benchmark.h>

using namespace pdhj;

// Range(0) is the number of remaining coarse stages (tree depth).
static void BM_ValueDelay(benchmark::State& state) {
  const Scenario sc = load_scenario(fixtures::delay_config(0.01));
  const double t = sc.grid.horizon() - sc.dp.coarse_step * static_cast<double>(state.range(0));
  const HistoryPoint p(t, sc.initial);
  for (auto _ : state) benchmark::DoNotOptimize(value(sc.problem, p, sc.dp).value);
}
BENCHMARK(BM_ValueDelay)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);

static void BM_ValueHopfLax(benchmark::State& state) {
  const Scenario sc = load_scenario(fixtures::hopf_lax_config("[[-1], [1]]", 0.01));
  const double t = sc.grid.horizon() - sc.dp.coarse_step * static_cast<double>(state.range(0));
  const HistoryPoint p(t, Path::constant(sc.grid, Vector::Constant(1, 0.4)));
  for (auto _ : state) benchmark::DoNotOptimize(value(sc.problem, p, sc.dp).value);
}
BENCHMARK(BM_ValueHopfLax)->DenseRange(2, 10, 2)->Unit(benchmark::kMicrosecond);

static void BM_IntegrateCharacteristic(benchmark::State& state) {
  const TimeGrid g(2, 1.0, 2.0, 1.0 / static_cast<double>(state.range(0)));
  Rng rng(1);
  const HistoryPoint p(0.0, random_path(g, rng));
  const ComplexHandle E = standard_E(1.0, delayed_linear_hamiltonian(DelayTerm::constant(1.0)));
  const Vector s = Vector::Constant(2, 0.5);
  const SelectionPolicy policy = SelectionPolicy::random(2);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_characteristic(E, p, s, policy).z.node(g.last_node()));
}
BENCHMARK(BM_IntegrateCharacteristic)->RangeMultiplier(2)->Range(50, 400);

static void BM_ClassicalSolve(benchmark::State& state) {
  const Scenario sc = load_scenario(fixtures::hopf_lax_config());
  ClassicalProblem cp;
  cp.H = sc.classical->H;
  cp.sigma = sc.classical->sigma;
  cp.lower = Vector::Constant(1, -4.0);
  cp.upper = Vector::Constant(1, 4.0);
  cp.cells = {static_cast<int>(state.range(0))};
  cp.horizon = sc.grid.horizon();
  for (auto _ : state) benchmark::DoNotOptimize(solve_classical(cp));
}
BENCHMARK(BM_ClassicalSolve)->RangeMultiplier(2)->Range(100, 800)->Unit(benchmark::kMillisecond);

static void BM_LyapunovV(benchmark::State& state) {
  const TimeGrid g(3, 1.0, 1.0, 1.0 / static_cast<double>(state.range(0)));
  Rng rng(3);
  const Path x = random_path(g, rng);
  for (auto _ : state) benchmark::DoNotOptimize(lyapunov_V(1.0, x));
}
BENCHMARK(BM_LyapunovV)->RangeMultiplier(4)->Range(16, 1024);

static void BM_Nu(benchmark::State& state) {
  const TimeGrid g(3, 1.0, 1.0, 0.01);
  Rng rng(4);
  const Path x = random_path(g, rng);
  const NuParams params(1.0, 1.0, 0.5 * eps_max(1.0, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(nu(params, 0.5, x));
}
BENCHMARK(BM_Nu);

BENCHMARK_MAIN();
