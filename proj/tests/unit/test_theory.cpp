#include <doctest.h>

#include "noble/error.hpp"
#include "noble/theory.hpp"

#include <cmath>
#include <random>

using namespace noble;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = gauss(rng);
  return m;
}

}  // namespace

TEST_CASE("mds objective vanishes for the identity embedding") {
  const Matrix x = random_matrix(6, 3, 1);
  CHECK(mds_objective(x, x) == doctest::Approx(0.0));
}

TEST_CASE("mds objective is invariant under rigid rotation") {
  const Matrix x = random_matrix(8, 2, 2);
  const double theta = 0.7;
  Matrix rotation(2, 2);
  rotation << std::cos(theta), -std::sin(theta), std::sin(theta),
      std::cos(theta);
  Matrix z = x * rotation;
  z.rowwise() += Eigen::RowVector2d(3.0, -1.0);
  CHECK(mds_objective(z, x) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mds objective equals an independent pairwise recomputation") {
  const Matrix z = random_matrix(5, 4, 3);
  const Matrix x = random_matrix(5, 7, 4);
  double expected = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      double dz = 0.0, dx = 0.0;
      for (int c = 0; c < 4; ++c) {
        const double d = z(i, c) - z(j, c);
        dz += d * d;
      }
      for (int c = 0; c < 7; ++c) {
        const double d = x(i, c) - x(j, c);
        dx += d * d;
      }
      const double gap = std::sqrt(dz) - std::sqrt(dx);
      expected += gap * gap;
    }
  }
  CHECK(std::abs(mds_objective(z, x) - expected) < 1e-12);
}

TEST_CASE("sigmoid rewrite at the fixed points") {
  Vector w(3);
  w << 1.0, 0.0, 0.0;
  const SigmoidRewriteResult same = sigmoid_rewrite_check(w, w);
  CHECK(same.pass);
  // Both forms give (1 + e^-1)^-1 when w = z.
  const double inner = 1.0 / (1.0 + std::exp(-1.0));
  CHECK(inner == doctest::Approx(0.7310585786300049).epsilon(1e-12));

  Vector opposite = -w;
  const SigmoidRewriteResult anti = sigmoid_rewrite_check(w, opposite);
  CHECK(anti.pass);
  const double expected = 1.0 / (1.0 + std::exp(1.0));
  CHECK(expected == doctest::Approx(0.2689414213699951).epsilon(1e-12));
}

TEST_CASE("sigmoid rewrite rejects unnormalized vectors") {
  Vector w(2), z(2);
  w << 2.0, 0.0;
  z << 1.0, 0.0;
  CHECK_THROWS_AS(sigmoid_rewrite_check(w, z), NotNormalized);
}

TEST_CASE("sigmoid rewrite sweep stays within 1e-12") {
  CHECK(sigmoid_rewrite_sweep(10000, 2, 64, 7) < 1e-12);
}

TEST_CASE("proposition check on a trained two-blob classifier") {
  // Two Gaussian blobs, one-hot two-class targets.
  const int n = 200;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 0.5);
  Matrix x(n, 2), y(n, 2);
  for (int i = 0; i < n; ++i) {
    const int cls = i % 2;
    x(i, 0) = (cls == 0 ? -2.0 : 2.0) + gauss(rng);
    x(i, 1) = gauss(rng);
    y(i, 0) = cls == 0 ? 1.0 : 0.0;
    y(i, 1) = cls == 1 ? 1.0 : 0.0;
  }

  Network net = Network::mlp(2, std::vector<int>{16, 8}, 2, 11);
  TrainConfig config;
  config.epochs = 300;
  config.batch_size = 32;
  config.seed = 11;
  train(net, x, y, LossKind::bce, config);

  // Lambda that admits every same-class pair: the squared gap tops out at
  // 4 on the unit sphere.
  const PropositionReport report = proposition_check(net, x, 4.0);
  CHECK(report.qualifying_pairs > 0);
  CHECK(report.frac_within_4lambda == doctest::Approx(1.0));
  CHECK(report.frac_within_2lambda <= 1.0);
  CHECK(report.mean_intra_class_distance < report.mean_inter_class_distance);

  CHECK_THROWS_AS(proposition_check(net, x, 1e-12), NoQualifyingPairs);
}

TEST_CASE("theory report json carries both sections") {
  PropositionReport prop;
  prop.lambda = 0.5;
  prop.qualifying_pairs = 10;
  prop.frac_within_4lambda = 1.0;
  prop.frac_within_2lambda = 0.9;
  const std::string json = theory_report_json(3e-16, 10000, prop);
  CHECK(json.find("sigmoid_rewrite") != std::string::npos);
  CHECK(json.find("proposition") != std::string::npos);
  CHECK(json.find("frac_within_4lambda") != std::string::npos);
}
