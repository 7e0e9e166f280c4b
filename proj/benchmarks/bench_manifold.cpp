#include <benchmark/benchmark.h>

#include "noble/jacobi.hpp"
#include "noble/manifold.hpp"

#include <random>

using namespace noble;

namespace {

Matrix random_points(Eigen::Index n, Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Matrix m(n, dim);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = u(rng);
  return m;
}

}  // namespace

static void BM_KnnGraph(benchmark::State& state) {
  const Matrix points = random_points(state.range(0), 8, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(knn_graph(points, 8));
  }
}
BENCHMARK(BM_KnnGraph)->Range(256, 2048)->Unit(benchmark::kMillisecond);

static void BM_Geodesics(benchmark::State& state) {
  const Matrix points = random_points(state.range(0), 3, 2);
  const NeighborGraph graph = knn_graph(points, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(geodesic_distances(graph));
  }
}
BENCHMARK(BM_Geodesics)->Range(128, 512)->Unit(benchmark::kMillisecond);

static void BM_JacobiEigen(benchmark::State& state) {
  const Matrix points = random_points(state.range(0), state.range(0), 3);
  const Matrix symmetric = points + points.transpose();
  for (auto _ : state) {
    benchmark::DoNotOptimize(jacobi_eigen(symmetric));
  }
}
BENCHMARK(BM_JacobiEigen)->Range(32, 256)->Unit(benchmark::kMillisecond);

static void BM_IsomapFit(benchmark::State& state) {
  const Matrix points = random_points(state.range(0), 8, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(isomap_fit(points, 8, 4, 256, 0));
  }
}
BENCHMARK(BM_IsomapFit)->Range(128, 512)->Unit(benchmark::kMillisecond);
