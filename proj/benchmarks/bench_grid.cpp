#include <benchmark/benchmark.h>

#include "noble/grid.hpp"

#include <random>
#include <vector>

using namespace noble;

namespace {

std::vector<Point2> random_points(std::size_t n, double extent,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, extent);
  std::vector<Point2> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) points.push_back({u(rng), u(rng)});
  return points;
}

}  // namespace

static void BM_Quantize(benchmark::State& state) {
  const auto points = random_points(4096, 100.0, 1);
  const GridSpec spec = GridSpec::fit(points, 0.2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(quantize(spec, points[i++ & 4095]));
  }
}
BENCHMARK(BM_Quantize);

static void BM_BuildCellMap(benchmark::State& state) {
  const auto points =
      random_points(static_cast<std::size_t>(state.range(0)), 100.0, 2);
  const GridSpec spec = GridSpec::fit(points, 0.2, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_cell_map(spec, points));
  }
}
BENCHMARK(BM_BuildCellMap)->Range(1 << 10, 1 << 14);

static void BM_NearestOccupiedCentroid(benchmark::State& state) {
  const auto points =
      random_points(static_cast<std::size_t>(state.range(0)), 100.0, 3);
  const GridSpec spec = GridSpec::fit(points, 0.5);
  const CellMap map = build_cell_map(spec, points);
  const auto queries = random_points(256, 100.0, 4);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nearest_occupied_centroid(map, queries[i++ & 255]));
  }
}
BENCHMARK(BM_NearestOccupiedCentroid)->Range(1 << 10, 1 << 14);

BENCHMARK_MAIN();
