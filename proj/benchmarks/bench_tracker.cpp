#include <benchmark/benchmark.h>

#include "trajmine/random.hpp"
#include "trajmine/tracker.hpp"
#include "trajmine/trajectory.hpp"

using namespace trajmine;

namespace {

Image noise(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  Image img(w, h, 1);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return img;
}

}  // namespace

// Template of side range(0) x range(0)/3 inside a window of three times its size.
static void BM_NccMatch(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const int h = std::max(4, w / 3);
  const Image frame = noise(3 * w, 3 * h, 1);
  const Patch templ = extract_patch(frame, Box(w, h, 2 * w, 2 * h));
  const Box search(0, 0, 3 * w, 3 * h);
  for (auto _ : state) benchmark::DoNotOptimize(ncc_match(templ, frame, search));
  state.counters["positions"] = static_cast<double>((2 * w + 1) * (2 * h + 1));
}
BENCHMARK(BM_NccMatch)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMicrosecond);

static void BM_NccTrackerStep(benchmark::State& state) {
  const Image f0 = noise(640, 360, 2);
  const NccTracker tracker;
  const Box box(300, 160, 380, 190);
  const auto patch = tracker.capture(FrameRef{0, &f0}, box);
  const TrajectoryEntry last{0, box, std::nullopt, EntryKind::Detection, 1.0, 0};
  for (auto _ : state) benchmark::DoNotOptimize(tracker.track(last, patch.get(), FrameRef{1, &f0}));
}
BENCHMARK(BM_NccTrackerStep)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
