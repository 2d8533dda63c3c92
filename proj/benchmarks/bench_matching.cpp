#include <benchmark/benchmark.h>

#include <optional>
#include <vector>

#include "trajmine/random.hpp"
#include "trajmine/tmm.hpp"

using namespace trajmine;

namespace {

// n detections near n trajectories, with neighbours close enough to compete.
MatchMatrix crowded(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Box> dets, last;
  std::vector<std::optional<Box>> tracked;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 30.0 * static_cast<double>(i), y = rng.uniform(0, 20);
    last.emplace_back(x, y, x + 60, y + 20);
    tracked.emplace_back(Box(x + 2, y, x + 62, y + 20));
    const double dx = rng.uniform(-8, 8), dy = rng.uniform(-4, 4);
    dets.emplace_back(x + dx, y + dy, x + dx + 60, y + dy + 20);
  }
  return build_match_matrix(dets, tracked, last);
}

}  // namespace

static void BM_ResolveMutualBest(benchmark::State& state) {
  const MatchMatrix m = crowded(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(resolve_matches(m, 0.5));
}
BENCHMARK(BM_ResolveMutualBest)->RangeMultiplier(2)->Range(2, 64);

static void BM_ResolveGreedy(benchmark::State& state) {
  const MatchMatrix m = crowded(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(resolve_matches_greedy(m, 0.5));
}
BENCHMARK(BM_ResolveGreedy)->RangeMultiplier(2)->Range(2, 64);

BENCHMARK_MAIN();
