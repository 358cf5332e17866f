#include <benchmark/benchmark.h>

#include "evcharge/closed_form.hpp"
#include "evcharge/diffusion.hpp"
#include "evcharge/exact.hpp"
#include "evcharge/simulation.hpp"

using namespace evcharge;

namespace {

void BM_ExactDirect(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const ModelParams p{static_cast<double>(K), 1.0, 1.0, Spaces::finite(K), K / 2.0};
  for (auto _ : state) benchmark::DoNotOptimize(solve_stationary(p).probs.data());
  state.counters["states"] = static_cast<double>((K + 1) * (K + 2) / 2);
}
BENCHMARK(BM_ExactDirect)->Arg(10)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ExactPower(benchmark::State& state) {
  const ModelParams p{20.0, 1.0, 1.0, Spaces::finite(40), 10.0};
  SolveOptions o;
  o.solver = SolverKind::power_iteration;
  for (auto _ : state) benchmark::DoNotOptimize(solve_stationary(p, o).probs.data());
}
BENCHMARK(BM_ExactPower)->Unit(benchmark::kMillisecond);

void BM_FullLotClosedForm(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const ModelParams p{1.0, 1.0, 1.0, Spaces::finite(K), K / 3.0};
  for (auto _ : state) benchmark::DoNotOptimize(dist_full_lot(p).mean());
}
BENCHMARK(BM_FullLotClosedForm)->Arg(50)->Arg(1000);

void BM_Gillespie(benchmark::State& state) {
  const ModelParams p{10.0, 1.0, 1.0, Spaces::finite(10), 4.0};
  SimConfig c;
  c.horizon = 1000.0;
  c.burn_in = 10.0;
  c.n_reps = 1;
  c.threads = 1;
  long events = 0;
  for (auto _ : state) {
    events += simulate_replication(p, c, 0).events;
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Gillespie)->Unit(benchmark::kMillisecond);

void BM_EulerMaruyama(benchmark::State& state) {
  const OUSpec s = hw_spec(1.0, 1.0, 0.0, 1.0);
  SimulateOptions o;
  o.horizon = 10.0;
  o.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_ou(s, {0.0, 0.0}, o).paths.data());
  state.counters["steps/s"] =
      benchmark::Counter(1e4 * static_cast<double>(state.iterations()), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_EulerMaruyama)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
