#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "gps/harness.hpp"
#include "gps/measure.hpp"
#include "gps/simulator.hpp"
#include "support/generators.hpp"

namespace {

using namespace gps;

void BM_ShiftForWork(benchmark::State& state) {
  std::mt19937_64 rng(7);
  const AtomicMeasure m(testing::random_atoms(rng, static_cast<std::size_t>(state.range(0))));
  const double top = m.first_moment();
  double y = 0.0;
  for (auto _ : state) {
    y += 0.618 * top;
    if (y > top) {
      y -= top;
    }
    benchmark::DoNotOptimize(m.shift_for_work(y));
  }
}
BENCHMARK(BM_ShiftForWork)->Arg(8)->Arg(64)->Arg(1024);

SimConfig mm1(double horizon) {
  SimConfig cfg;
  cfg.arrivals = {DistributionSpec::exponential(1.0), EquilibriumDelay{}};
  cfg.service = DistributionSpec::exponential(1.0);
  cfg.horizon = horizon;
  cfg.seed = 11;
  return cfg;
}

void BM_Run(benchmark::State& state) {
  const SimConfig cfg = mm1(static_cast<double>(state.range(0)));
  for (auto _ : state) {
    const Trace tr = run(cfg);
    benchmark::DoNotOptimize(tr.batches().size());
  }
}
BENCHMARK(BM_Run)->Arg(100)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_Snapshot(benchmark::State& state) {
  const Trace tr = run(mm1(10000.0));
  std::mt19937_64 rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tr.snapshot(testing::uniform(rng, 0.0, tr.horizon())));
  }
}
BENCHMARK(BM_Snapshot);

void BM_ScaledSnapshot(benchmark::State& state) {
  const Trace tr = run(mm1(800.0 * 3.0));
  std::mt19937_64 rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(scaled_snapshot(tr, 800.0, testing::uniform(rng, 0.0, 3.0)));
  }
}
BENCHMARK(BM_ScaledSnapshot);

}  // namespace

BENCHMARK_MAIN();
