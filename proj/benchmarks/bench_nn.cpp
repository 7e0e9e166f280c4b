#include <benchmark/benchmark.h>

#include "noble/nn.hpp"

#include <random>

using namespace noble;

namespace {

Matrix random_batch(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = gauss(rng);
  return m;
}

}  // namespace

// Fingerprint-localizer shape: 520 inputs, two 128 hidden layers, a wide
// multi-hot output head.
static void BM_ForwardInference(benchmark::State& state) {
  Network net = Network::mlp(520, std::vector<int>{128, 128}, 512, 1);
  net.set_mode(Network::Mode::inference);
  const Matrix batch = random_batch(state.range(0), 520, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(batch));
  }
}
BENCHMARK(BM_ForwardInference)->Arg(1)->Arg(64)->Arg(256);

static void BM_TrainStep(benchmark::State& state) {
  Network net = Network::mlp(520, std::vector<int>{128, 128}, 512, 3);
  net.set_mode(Network::Mode::training);
  const Matrix batch = random_batch(64, 520, 4);
  const Matrix targets =
      (random_batch(64, 512, 5).array() > 1.5).cast<double>().matrix();
  for (auto _ : state) {
    const ForwardResult out = net.forward(batch);
    const LossResult loss = bce_loss(out.probs, targets);
    net.zero_grad();
    net.backward(loss.logit_grad);
    benchmark::DoNotOptimize(loss.value);
  }
}
BENCHMARK(BM_TrainStep);
