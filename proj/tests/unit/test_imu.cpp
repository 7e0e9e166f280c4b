#include <doctest.h>

#include "noble/error.hpp"
#include "noble/imu_model.hpp"
#include "noble/synth.hpp"

#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace noble;
using noble::testing::ScratchDir;

namespace {

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1e-6, std::abs(a) + std::abs(b));
}

ImuCorpus tiny_corpus(int walk_steps, int readings, int count, int max_len,
                      std::uint64_t seed, double accel_noise = 0.05,
                      double gyro_noise = 0.01) {
  ImuSynthSpec spec;
  spec.walk_steps = walk_steps;
  spec.readings_per_gap = readings;
  spec.count = count;
  spec.max_len = max_len;
  spec.seed = seed;
  spec.accel_noise = accel_noise;
  spec.gyro_noise = gyro_noise;
  return synth_imu(spec);
}

}  // namespace

TEST_CASE("project_segments pads unused slots with zeros") {
  const ImuCorpus corpus = tiny_corpus(20, 8, 30, 4, 1);
  const ImuModel model = build_imu_model(corpus, 0.4, 3, ImuTask::classify,
                                         /*projection_dim=*/4,
                                         /*max_segments=*/6);
  const int p = model.spec.projection_dim;

  // A one-segment path leaves 5 of 6 slots zero.
  ImuPath short_path = corpus.paths[0];
  short_path.segment_ids.resize(1);
  const Vector embedding = project_segments(model, corpus, short_path);
  REQUIRE(embedding.size() == 6 * p);
  CHECK(embedding.tail(5 * p).cwiseAbs().maxCoeff() == 0.0);
  CHECK(embedding.head(p).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("zero projection weights produce a zero embedding") {
  const ImuCorpus corpus = tiny_corpus(20, 8, 30, 4, 2);
  ImuModel model = build_imu_model(corpus, 0.4, 3, ImuTask::classify, 4, 6);
  model.projection.setZero();
  const Vector embedding =
      project_segments(model, corpus, corpus.paths[0]);
  CHECK(embedding.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("permuting segments changes the embedding") {
  const ImuCorpus corpus = tiny_corpus(20, 8, 30, 4, 3);
  const ImuModel model = build_imu_model(corpus, 0.4, 3, ImuTask::classify, 4, 6);

  // Find a path with two distinct segments.
  for (const ImuPath& path : corpus.paths) {
    if (path.length() < 2) continue;
    if ((corpus.segments[path.segment_ids[0]] -
         corpus.segments[path.segment_ids[1]])
            .cwiseAbs()
            .maxCoeff() == 0.0)
      continue;
    ImuPath swapped = path;
    std::swap(swapped.segment_ids[0], swapped.segment_ids[1]);
    const Vector a = project_segments(model, corpus, path);
    const Vector b = project_segments(model, corpus, swapped);
    CHECK((a - b).cwiseAbs().maxCoeff() > 0.0);
    return;
  }
  FAIL("no two-segment path in the fixture corpus");
}

TEST_CASE("forward produces location scores per fine cell, deterministically") {
  const ImuCorpus corpus = tiny_corpus(30, 8, 40, 5, 4);
  const ImuModel model = build_imu_model(corpus, 0.4, 5);
  const std::vector<std::size_t> batch{0, 1, 2};
  const ImuForward a = forward_imu(model, corpus, batch);
  CHECK(a.location_probs.cols() == model.map.k_fine());
  CHECK(a.location_probs.rows() == 3);
  CHECK(a.displacement.cols() == 2);

  const ImuForward b = forward_imu(model, corpus, batch);
  CHECK((a.location_probs - b.location_probs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unknown start locations are rejected") {
  ImuCorpus corpus = tiny_corpus(20, 8, 20, 3, 5);
  const ImuModel model = build_imu_model(corpus, 0.4, 5);
  corpus.paths[0].start_ref = 10000;
  CHECK_THROWS_AS(forward_imu(model, corpus, {0}), UnknownStartLocation);
}

TEST_CASE("projection gradient matches finite differences across slots") {
  // Small dims keep the parameter sweep cheap.
  const ImuCorpus corpus = tiny_corpus(12, 6, 16, 3, 6);
  ImuModel model = build_imu_model(corpus, 0.4, 7, ImuTask::classify, 3, 4);
  // Gradient math needs labelable targets: train-split paths only.
  const std::vector<std::size_t> batch(corpus.train_idx.begin(),
                                       corpus.train_idx.begin() + 5);
  const double aux = 0.1;

  Matrix analytic =
      Matrix::Zero(model.projection.rows(), model.projection.cols());
  imu_training_loss(model, corpus, batch, aux, &analytic);

  const double step = 1e-5;
  double worst = 0.0;
  for (Eigen::Index r = 0; r < model.projection.rows(); r += 7) {
    for (Eigen::Index c = 0; c < model.projection.cols(); ++c) {
      const double saved = model.projection(r, c);
      model.projection(r, c) = saved + step;
      const double up = imu_training_loss(model, corpus, batch, aux);
      model.projection(r, c) = saved - step;
      const double down = imu_training_loss(model, corpus, batch, aux);
      model.projection(r, c) = saved;
      worst = std::max(worst, rel_err(analytic(r, c), (up - down) / (2 * step)));
    }
  }
  CHECK(worst < 1e-4);

  // The displacement and location nets get checked through the same pass.
  std::vector<ParamView> net_params = model.displacement_net.parameters();
  for (const ParamView& p : model.location_net.parameters())
    net_params.push_back(p);
  std::vector<std::vector<double>> net_analytic;
  for (const ParamView& p : net_params)
    net_analytic.emplace_back(p.grad, p.grad + p.size);

  double worst_net = 0.0;
  for (std::size_t t = 0; t < net_params.size(); ++t) {
    const ParamView& p = net_params[t];
    const Eigen::Index stride = std::max<Eigen::Index>(1, p.size / 40);
    for (Eigen::Index j = 0; j < p.size; j += stride) {
      const double saved = p.value[j];
      p.value[j] = saved + step;
      const double up = imu_training_loss(model, corpus, batch, aux);
      p.value[j] = saved - step;
      const double down = imu_training_loss(model, corpus, batch, aux);
      p.value[j] = saved;
      worst_net = std::max(
          worst_net,
          rel_err(net_analytic[t][static_cast<std::size_t>(j)],
                  (up - down) / (2 * step)));
    }
  }
  CHECK(worst_net < 1e-4);
}

TEST_CASE("aux weight zero reduces to the pure classification loss") {
  const ImuCorpus corpus = tiny_corpus(15, 6, 20, 3, 7);
  ImuModel model = build_imu_model(corpus, 0.4, 9);
  const std::vector<std::size_t> batch{0, 1, 2};
  const double with_aux = imu_training_loss(model, corpus, batch, 0.1);
  const double without = imu_training_loss(model, corpus, batch, 0.0);
  CHECK(with_aux > without);  // the aux term is nonnegative
}

TEST_CASE("training is reproducible and the displacement module learns") {
  // Noiseless world-frame corpus: displacement is a linear functional of
  // the samples, so the supervised displacement head can drive its
  // validation MSE down. (Under body-frame recording a noiseless straight
  // gap carries no absolute direction at all.)
  ImuSynthSpec spec;
  spec.walk_steps = 50;
  spec.readings_per_gap = 64;
  spec.count = 260;
  spec.max_len = 6;
  spec.accel_noise = 0.0;
  spec.gyro_noise = 0.0;
  spec.body_frame = false;
  spec.seed = 8;
  const ImuCorpus corpus = synth_imu(spec);

  TrainConfig config;
  config.epochs = 150;
  config.batch_size = 32;
  config.seed = 41;
  config.patience = 150;

  ImuModel model = build_imu_model(corpus, 0.4, 41, ImuTask::classify, 16, 6);
  const ImuTrainReport report = train_imu(model, corpus, config, 1.0);
  CHECK(!report.train_loss.empty());

  // Deterministic replay.
  ImuModel again = build_imu_model(corpus, 0.4, 41, ImuTask::classify, 16, 6);
  const ImuTrainReport report2 = train_imu(again, corpus, config, 1.0);
  REQUIRE(report.train_loss.size() == report2.train_loss.size());
  for (std::size_t i = 0; i < report.train_loss.size(); ++i)
    CHECK(report.train_loss[i] == report2.train_loss[i]);

  // Noiseless displacement supervision drives the validation MSE low.
  const ImuForward out = forward_imu(model, corpus, corpus.val_idx);
  double mse = 0.0;
  for (std::size_t b = 0; b < corpus.val_idx.size(); ++b) {
    const ImuPath& path = corpus.paths[corpus.val_idx[b]];
    const double dx = out.displacement(static_cast<Eigen::Index>(b), 0) -
                      (path.end_position.x - path.start_position.x);
    const double dy = out.displacement(static_cast<Eigen::Index>(b), 1) -
                      (path.end_position.y - path.start_position.y);
    mse += dx * dx + dy * dy;
  }
  mse /= static_cast<double>(corpus.val_idx.size());
  CHECK(mse < 0.1);
}

TEST_CASE("predictions land on occupied cells and honor the cell bound") {
  const ImuCorpus corpus = tiny_corpus(40, 16, 120, 5, 9);
  ImuModel model = build_imu_model(corpus, 0.4, 43, ImuTask::classify, 8, 5);
  TrainConfig config;
  config.epochs = 20;
  config.batch_size = 32;
  config.seed = 43;
  train_imu(model, corpus, config, 0.1);

  const double bound = 0.4 * std::sqrt(2.0) / 2.0;
  for (std::size_t idx : corpus.test_idx) {
    const Point2 predicted = predict_end_position(model, corpus, idx);
    CHECK(model.map.occupied(predicted));
    const ImuPath& path = corpus.paths[idx];
    // A correct classification pins the error to the cell geometry.
    if (model.map.spec().bounds.contains(path.end_position)) {
      const auto truth =
          model.map.fine_class_of(quantize(model.map.spec(), path.end_position));
      const auto predicted_class = model.map.fine_class_of(
          quantize(model.map.spec(), predicted));
      if (truth && predicted_class && *truth == *predicted_class)
        CHECK(position_error(predicted, path.end_position) <= bound + 1e-9);
    }
  }
}

TEST_CASE("imu model directory round-trip") {
  ScratchDir dir("imu_model");
  const ImuCorpus corpus = tiny_corpus(25, 8, 40, 4, 10);
  ImuModel model = build_imu_model(corpus, 0.4, 47, ImuTask::classify, 6, 5);
  TrainConfig config;
  config.epochs = 5;
  config.batch_size = 16;
  train_imu(model, corpus, config, 0.1);
  save_imu_model(model, dir.str());

  const ImuModel loaded = load_imu_model(dir.str());
  CHECK(loaded.spec.projection_dim == model.spec.projection_dim);
  CHECK((loaded.projection - model.projection).cwiseAbs().maxCoeff() == 0.0);

  const std::vector<std::size_t> batch{0, 1, 2};
  const ImuForward a = forward_imu(model, corpus, batch);
  const ImuForward b = forward_imu(loaded, corpus, batch);
  CHECK((a.location_probs - b.location_probs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("evaluate_imu reports location hits and the off-map rate") {
  const ImuCorpus corpus = tiny_corpus(30, 8, 60, 4, 11);
  ImuModel model = build_imu_model(corpus, 0.4, 53);
  TrainConfig config;
  config.epochs = 5;
  config.batch_size = 16;
  train_imu(model, corpus, config, 0.1);

  const MetricsReport report = evaluate_imu(model, corpus, corpus.test_idx);
  CHECK(report.n_eval == corpus.test_idx.size());
  CHECK(report.hit_rates.count("location") == 1);
  CHECK(report.off_map_rate == 0.0);
  CHECK(report.config.at("task") == "classify");
}
