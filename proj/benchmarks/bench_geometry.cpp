#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "trajmine/geometry.hpp"
#include "trajmine/random.hpp"

using namespace trajmine;

namespace {

std::vector<Box> random_boxes(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Box> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(0, 600), y = rng.uniform(0, 300);
    out.emplace_back(x, y, x + rng.uniform(5, 120), y + rng.uniform(5, 50));
  }
  return out;
}

}  // namespace

static void BM_Iou(benchmark::State& state) {
  const auto boxes = random_boxes(1024, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(iou(boxes[i & 1023], boxes[(i * 7 + 3) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_Iou);

static void BM_MinAreaRect(benchmark::State& state) {
  Rng rng(2);
  std::vector<Point2> pts;
  for (int i = 0; i < state.range(0); ++i) {
    const double a = rng.uniform(0, 2 * M_PI), r = rng.uniform(0, 1);
    pts.push_back({200 + 80 * r * std::cos(a), 100 + 20 * r * std::sin(a)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(min_area_rect(pts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MinAreaRect)->RangeMultiplier(4)->Range(4, 4096)->Complexity(benchmark::oNLogN);

BENCHMARK_MAIN();
