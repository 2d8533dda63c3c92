#include <benchmark/benchmark.h>

#include "trajmine/sim.hpp"

using namespace trajmine;

// One oracle-tracked trial: scene, noisy detections, mining and metrics.
static void BM_Trial(benchmark::State& state) {
  TrialSpec spec;
  spec.scene.n_instances = static_cast<int>(state.range(0));
  spec.noise.p_miss = 0.2;
  spec.noise.jitter_sigma = 1.0;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    spec.scene.seed = seed++;
    benchmark::DoNotOptimize(run_trial(spec).metrics);
  }
}
BENCHMARK(BM_Trial)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMicrosecond);

static void BM_CrossingTrial(benchmark::State& state) {
  TrialSpec spec;
  spec.scene.crossing = true;
  spec.noise.p_miss = 0.2;
  spec.noise.jitter_sigma = 1.0;
  spec.strategy = state.range(0) ? MatchingStrategy::MutualBest : MatchingStrategy::Greedy;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    spec.scene.seed = seed++;
    benchmark::DoNotOptimize(run_trial(spec).metrics);
  }
}
BENCHMARK(BM_CrossingTrial)->ArgName("mutual_best")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
