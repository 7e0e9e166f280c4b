// Acceptance suite: one line per criterion, PASS/FAIL/SKIP, nonzero exit on
// any failure. Criteria run against seeded synthetic corpora; the real-data
// reproduction runs only when the public datasets are present (see below).

#include "noble/dataset.hpp"
#include "noble/error.hpp"
#include "noble/grid.hpp"
#include "noble/imu_model.hpp"
#include "noble/manifold.hpp"
#include "noble/metrics.hpp"
#include "noble/nn.hpp"
#include "noble/synth.hpp"
#include "noble/theory.hpp"
#include "noble/wifi_model.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace noble;

namespace {

struct Outcome {
  enum class Kind { pass, fail, skip } kind = Kind::fail;
  std::string detail;
};

Outcome pass(std::string detail) { return {Outcome::Kind::pass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Outcome::Kind::fail, std::move(detail)}; }
Outcome skip(std::string detail) { return {Outcome::Kind::skip, std::move(detail)}; }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness

double network_fd_worst(Network& net, const Matrix& x, const Matrix& y,
                        LossKind kind) {
  auto loss_of = [&]() {
    net.set_mode(Network::Mode::training);
    const ForwardResult out = net.forward(x);
    return kind == LossKind::bce ? bce_loss(out.probs, y).value
                                 : mse_loss(out.logits, y).value;
  };
  net.set_mode(Network::Mode::training);
  net.zero_grad();
  const ForwardResult out = net.forward(x);
  const LossResult loss =
      kind == LossKind::bce ? bce_loss(out.probs, y) : mse_loss(out.logits, y);
  net.backward(loss.logit_grad);

  std::vector<ParamView> params = net.parameters();
  std::vector<std::vector<double>> analytic;
  for (const ParamView& p : params) analytic.emplace_back(p.grad, p.grad + p.size);

  // Step large enough that (up - down) stays clear of the cancellation
  // floor at this loss magnitude; truncation error is still far below the
  // 1e-4 gate.
  const double step = 1e-4;
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (Eigen::Index j = 0; j < params[t].size; ++j) {
      double& theta = params[t].value[j];
      const double saved = theta;
      theta = saved + step;
      const double up = loss_of();
      theta = saved - step;
      const double down = loss_of();
      theta = saved;
      const double fd = (up - down) / (2.0 * step);
      const double a = analytic[t][static_cast<std::size_t>(j)];
      worst =
          std::max(worst, std::abs(a - fd) / std::max(1e-6, std::abs(a) + std::abs(fd)));
    }
  }
  return worst;
}

Outcome criterion_gradients() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix x(16, 20), y_cls(16, 10), y_reg(16, 10);
  for (Eigen::Index r = 0; r < 16; ++r) {
    for (Eigen::Index c = 0; c < 20; ++c) x(r, c) = gauss(rng);
    for (Eigen::Index c = 0; c < 10; ++c) {
      y_cls(r, c) = gauss(rng) > 0.0 ? 1.0 : 0.0;
      y_reg(r, c) = gauss(rng);
    }
  }
  Network bce_net = Network::mlp(20, std::vector<int>{40, 40}, 10, 101);
  const double worst_bce = network_fd_worst(bce_net, x, y_cls, LossKind::bce);
  Network mse_net = Network::mlp(20, std::vector<int>{40, 40}, 10, 102);
  const double worst_mse = network_fd_worst(mse_net, x, y_reg, LossKind::mse);

  const double elapsed = seconds_since(start);
  const double worst = std::max(worst_bce, worst_mse);
  std::ostringstream detail;
  detail << "max rel err " << fmt(worst, 3) << " (bce " << fmt(worst_bce, 3)
         << ", mse " << fmt(worst_mse, 3) << "), " << fmt(elapsed, 3) << "s";
  if (worst >= 1e-4) return fail(detail.str());
  if (elapsed >= 30.0) return fail(detail.str() + " over the 30s budget");
  return pass(detail.str());
}

// ---------------------------------------------------------------------------
// 2. Sigmoid rewrite identity

Outcome criterion_sigmoid_rewrite() {
  const double residual = sigmoid_rewrite_sweep(10000, 2, 64, 202);
  const std::string detail = "max residual " + fmt(residual, 3) +
                             " over 1e4 unit pairs, dims 2-64";
  return residual < 1e-12 ? pass(detail) : fail(detail);
}

// ---------------------------------------------------------------------------
// 3. Quantizer geometry

Outcome criterion_quantizer() {
  const double tau = 0.3;
  GridSpec spec;
  spec.tau = tau;
  spec.origin_x = -1.0;
  spec.origin_y = -2.0;
  spec.bounds = Rect{-1.0, -2.0, 49.0, 48.0};

  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> ux(-1.0, 49.0 - 1e-9);
  std::uniform_real_distribution<double> uy(-2.0, 48.0 - 1e-9);
  const double bound = tau * std::sqrt(2.0) / 2.0 + 1e-12;

  std::vector<Point2> points;
  points.reserve(100000);
  for (int i = 0; i < 100000; ++i) points.push_back({ux(rng), uy(rng)});

  for (const Point2& p : points) {
    const CellIndex cell = quantize(spec, p);
    const Point2 c = centroid(spec, cell, tau);
    if (std::hypot(c.x - p.x, c.y - p.y) > bound)
      return fail("roundtrip error above tau*sqrt(2)/2 at (" + fmt(p.x) + "," +
                  fmt(p.y) + ")");
    // Partition: the floor arithmetic pins exactly one half-open cell.
    if (p.x < spec.origin_x + static_cast<double>(cell.ix) * tau ||
        p.x >= spec.origin_x + static_cast<double>(cell.ix + 1) * tau ||
        p.y < spec.origin_y + static_cast<double>(cell.iy) * tau ||
        p.y >= spec.origin_y + static_cast<double>(cell.iy + 1) * tau)
      return fail("point escaped its half-open cell");
  }

  // Determinism: permuted construction yields the identical map.
  std::vector<Point2> sample(points.begin(), points.begin() + 5000);
  const CellMap a = build_cell_map(GridSpec::fit(sample, tau), sample);
  std::shuffle(sample.begin(), sample.end(), rng);
  const CellMap b = build_cell_map(GridSpec::fit(sample, tau), sample);
  if (serialize_cell_map(a) != serialize_cell_map(b))
    return fail("cell map depends on point order");

  return pass("1e5 roundtrips within " + fmt(bound, 3) +
              "m, partition and determinism hold");
}

// ---------------------------------------------------------------------------
// 4. Proposition check on a trained two-blob toy

Outcome criterion_proposition() {
  const int n = 200;
  std::mt19937_64 rng(404);
  std::normal_distribution<double> gauss(0.0, 0.5);
  Matrix x(n, 2), y(n, 2);
  for (int i = 0; i < n; ++i) {
    const int cls = i % 2;
    x(i, 0) = (cls == 0 ? -2.0 : 2.0) + gauss(rng);
    x(i, 1) = gauss(rng);
    y(i, 0) = cls == 0 ? 1.0 : 0.0;
    y(i, 1) = cls == 1 ? 1.0 : 0.0;
  }
  Network net = Network::mlp(2, std::vector<int>{16, 8}, 2, 404);
  TrainConfig config;
  config.epochs = 300;
  config.batch_size = 32;
  config.seed = 404;
  train(net, x, y, LossKind::bce, config);

  // Lambda per the qualifying rule: the worst same-class weight gap, so
  // every sample pair of each predicted class qualifies.
  net.set_mode(Network::Mode::inference);
  const ForwardResult out = net.forward(x);
  Matrix z = out.embedding;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double norm = z.row(i).norm();
    if (norm > 0.0) z.row(i) /= norm;
  }
  Matrix w = net.last_linear_weight();
  for (Eigen::Index c = 0; c < w.rows(); ++c) {
    const double norm = w.row(c).norm();
    if (norm > 0.0) w.row(c) /= norm;
  }
  double lambda = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    out.probs.row(i).maxCoeff(&best);
    lambda = std::max(lambda, (w.row(best) - z.row(i)).squaredNorm());
  }

  const PropositionReport report = proposition_check(net, x, lambda);
  std::ostringstream detail;
  detail << "lambda " << fmt(lambda, 3) << ", " << report.qualifying_pairs
         << " pairs, 4-lambda " << fmt(100.0 * report.frac_within_4lambda, 4)
         << "%, 2-lambda " << fmt(100.0 * report.frac_within_2lambda, 4)
         << "% (reported), intra " << fmt(report.mean_intra_class_distance, 3)
         << " < inter " << fmt(report.mean_inter_class_distance, 3);
  if (report.frac_within_4lambda != 1.0) return fail(detail.str());
  if (report.mean_intra_class_distance >= report.mean_inter_class_distance)
    return fail(detail.str());
  return pass(detail.str());
}

// ---------------------------------------------------------------------------
// 5. Oracle equivalence

Outcome criterion_oracles() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 10.0);

  // kNN graph vs full-sort brute force, n=200.
  Matrix points(200, 4);
  for (Eigen::Index r = 0; r < 200; ++r)
    for (Eigen::Index c = 0; c < 4; ++c) points(r, c) = u(rng);
  const int k = 6;
  const NeighborGraph graph = knn_graph(points, k);
  for (std::size_t i = 0; i < 200; ++i) {
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t j = 0; j < 200; ++j) {
      if (j == i) continue;
      dist.emplace_back((points.row(static_cast<Eigen::Index>(i)) -
                         points.row(static_cast<Eigen::Index>(j)))
                            .norm(),
                        j);
    }
    std::sort(dist.begin(), dist.end());
    for (int t = 0; t < k; ++t)
      if (graph.knn[i][static_cast<std::size_t>(t)] !=
          dist[static_cast<std::size_t>(t)].second)
        return fail("kNN graph disagrees with brute force at node " +
                    std::to_string(i));
  }

  // Geodesics vs Floyd-Warshall, n=50.
  Matrix small(50, 3);
  for (Eigen::Index r = 0; r < 50; ++r)
    for (Eigen::Index c = 0; c < 3; ++c) small(r, c) = u(rng);
  const NeighborGraph small_graph = knn_graph(small, 4);
  const Matrix geo = geodesic_distances(small_graph);
  const auto nn = static_cast<Eigen::Index>(small_graph.node_count);
  Matrix fw = Matrix::Constant(nn, nn, std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < nn; ++i) fw(i, i) = 0.0;
  for (std::size_t i = 0; i < small_graph.node_count; ++i)
    for (const auto& [j, wgt] : small_graph.edges[i])
      fw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = wgt;
  for (Eigen::Index m = 0; m < nn; ++m)
    for (Eigen::Index i = 0; i < nn; ++i)
      for (Eigen::Index j = 0; j < nn; ++j)
        fw(i, j) = std::min(fw(i, j), fw(i, m) + fw(m, j));
  const double geo_gap = (geo - fw).cwiseAbs().maxCoeff();
  if (geo_gap > 1e-12)
    return fail("geodesics differ from Floyd-Warshall by " + fmt(geo_gap, 3));

  // Classical MDS recovers 10 planar points up to a rigid transform.
  Matrix planar(10, 2);
  for (Eigen::Index r = 0; r < 10; ++r)
    for (Eigen::Index c = 0; c < 2; ++c) planar(r, c) = u(rng);
  Matrix d = Matrix::Zero(10, 10);
  for (Eigen::Index i = 0; i < 10; ++i)
    for (Eigen::Index j = 0; j < 10; ++j)
      d(i, j) = (planar.row(i) - planar.row(j)).norm();
  const Matrix embedding = classical_mds(d, 2);
  const Vector mean_x = planar.colwise().mean().transpose();
  const Vector mean_z = embedding.colwise().mean().transpose();
  const Matrix xc = planar.rowwise() - mean_x.transpose();
  const Matrix zc = embedding.rowwise() - mean_z.transpose();
  Eigen::JacobiSVD<Matrix> svd(zc.transpose() * xc,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double residual =
      (zc * (svd.matrixU() * svd.matrixV().transpose()) - xc).norm();
  if (residual >= 1e-6)
    return fail("MDS Procrustes residual " + fmt(residual, 3));

  // LLE weight rows sum to one.
  Matrix cloud(80, 3);
  for (Eigen::Index r = 0; r < 80; ++r)
    for (Eigen::Index c = 0; c < 3; ++c) cloud(r, c) = u(rng);
  const EmbeddingModel lle = lle_fit(cloud, 6, 2);
  std::mt19937_64 wrng(506);
  for (int t = 0; t < 40; ++t) {
    Matrix neighbors(6, 3);
    Vector row(3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index r = 0; r < 6; ++r)
      for (Eigen::Index c = 0; c < 3; ++c) neighbors(r, c) = gauss(wrng);
    for (Eigen::Index c = 0; c < 3; ++c) row(c) = gauss(wrng);
    const Vector wts = lle_weights(neighbors, row, 2);
    if (std::abs(wts.sum() - 1.0) > 1e-10)
      return fail("LLE weights sum to " + fmt(wts.sum(), 12));
  }
  if (!lle.embedding.allFinite()) return fail("LLE embedding not finite");

  const double elapsed = seconds_since(start);
  if (elapsed >= 60.0) return fail("oracle block took " + fmt(elapsed, 3) + "s");
  return pass("kNN=brute force, geodesics=Floyd-Warshall (gap " +
              fmt(geo_gap, 2) + "), Procrustes " + fmt(residual, 2) +
              ", LLE rows sum to 1; " + fmt(elapsed, 3) + "s");
}

// ---------------------------------------------------------------------------
// 6. Structure awareness on the hollow-courtyard corpus

Outcome criterion_structure_awareness() {
  const auto start = std::chrono::steady_clock::now();

  WifiSynthSpec spec;
  spec.n_samples = 3000;
  spec.noise_dbm = 8.0;
  spec.dropout_dbm = -90.0;
  spec.access_points = grid_access_points(spec.mask, 6, 4);
  spec.seed = 606;
  const WifiCorpus corpus = normalize_rssi(synth_wifi(spec));

  const double tau = 2.0;
  TrainConfig config;
  config.epochs = 150;
  config.batch_size = 64;
  config.seed = 606;
  config.patience = 40;

  WifiModel model = build_wifi_model(corpus, tau, 5.0 * tau, true, 606);
  train_wifi(model, corpus, config);
  const MetricsReport noble_report = evaluate_wifi(model, corpus.test);

  const RegressionBaseline regression =
      deep_regression(corpus, config, tau, model.map);
  const MetricsReport projected = regression_projection(
      regression.test_predictions, positions_of(corpus.test), model.map);

  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "mean error: tracker " << fmt(noble_report.mean_error_m, 3)
         << "m < projection " << fmt(projected.mean_error_m, 3)
         << "m <= regression " << fmt(regression.report.mean_error_m, 3)
         << "m; off-map: tracker " << fmt(100 * noble_report.off_map_rate, 3)
         << "%, regression " << fmt(100 * regression.report.off_map_rate, 3)
         << "%; " << fmt(elapsed, 3) << "s";

  if (noble_report.off_map_rate != 0.0) return fail(detail.str());
  if (regression.report.off_map_rate <= 0.05) return fail(detail.str());
  if (noble_report.mean_error_m >= regression.report.mean_error_m)
    return fail(detail.str());
  if (projected.mean_error_m < noble_report.mean_error_m ||
      projected.mean_error_m > regression.report.mean_error_m)
    return fail(detail.str());
  if (elapsed >= 600.0) return fail(detail.str() + " over the 10min budget");
  return pass(detail.str());
}

// ---------------------------------------------------------------------------
// 7. Synthetic IMU tracking

Outcome criterion_imu() {
  const auto start = std::chrono::steady_clock::now();

  // Sparse reference landmarks (4m pitch around a courtyard loop) with
  // dead-reckoning-style noise: per-gap gain and bias errors accumulate
  // along a path, so displacement integration alone is meters off while
  // the landmark structure stays decodable.
  ImuSynthSpec spec;
  spec.mask = OccupancyMask({Rect{0, 0, 40, 24}}, {Rect{8, 8, 32, 16}}, 4.0);
  spec.walk_steps = 400;
  spec.count = 1500;
  spec.max_len = 16;
  spec.accel_noise = 0.3;
  spec.accel_bias = 0.1;
  spec.accel_gain = 0.15;
  spec.gyro_noise = 0.02;
  spec.gyro_bias = 0.02;
  spec.waypoint_jitter = 0.5;
  spec.seed = 707;
  const ImuCorpus corpus = synth_imu(spec);

  TrainConfig config;
  config.epochs = 200;
  config.batch_size = 64;
  config.learning_rate = 2e-3;
  config.seed = 707;
  config.patience = 30;

  ImuModel tracker =
      build_imu_model(corpus, 0.4, 707, ImuTask::classify, 32, spec.max_len);
  train_imu(tracker, corpus, config, 0.5);
  const MetricsReport tracker_report =
      evaluate_imu(tracker, corpus, corpus.test_idx);

  ImuModel regressor =
      build_imu_model(corpus, 0.4, 708, ImuTask::regress, 32, spec.max_len);
  train_imu(regressor, corpus, config, 0.0);
  const MetricsReport regression_report =
      evaluate_imu(regressor, corpus, corpus.test_idx);

  // Correctly classified paths stay within the 0.4m cell bound.
  const double bound = 0.4 * std::sqrt(2.0) / 2.0 + 1e-9;
  double worst_hit_error = 0.0;
  for (std::size_t idx : corpus.test_idx) {
    const ImuPath& path = corpus.paths[idx];
    const Point2 predicted = predict_end_position(tracker, corpus, idx);
    if (!tracker.map.spec().bounds.contains(path.end_position)) continue;
    const auto truth = tracker.map.fine_class_of(
        quantize(tracker.map.spec(), path.end_position));
    const auto got =
        tracker.map.fine_class_of(quantize(tracker.map.spec(), predicted));
    if (truth && got && *truth == *got)
      worst_hit_error = std::max(
          worst_hit_error, position_error(predicted, path.end_position));
  }

  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "mean error: tracker " << fmt(tracker_report.mean_error_m, 3)
         << "m vs regression " << fmt(regression_report.mean_error_m, 3)
         << "m (need >=20% margin); hit-bound " << fmt(worst_hit_error, 3)
         << "m <= " << fmt(bound, 3) << "m; location hit rate "
         << fmt(100 * tracker_report.hit_rates.at("location"), 3) << "%; "
         << fmt(elapsed, 3) << "s";

  if (tracker_report.mean_error_m >= 0.8 * regression_report.mean_error_m)
    return fail(detail.str());
  if (worst_hit_error > bound) return fail(detail.str());
  if (elapsed >= 900.0) return fail(detail.str() + " over the 15min budget");
  return pass(detail.str());
}

// ---------------------------------------------------------------------------
// 8. Real-data reproduction (optional: requires the public corpora)

std::string data_root() {
  if (const char* env = std::getenv("NOBLE_DATA_DIR")) return env;
  return "data";
}

Outcome criterion_real_data() {
  namespace fs = std::filesystem;
  const fs::path root(data_root());
  const fs::path uji_train = root / "UJIIndoorLoc" / "trainingData.csv";
  if (!fs::exists(uji_train))
    return skip("UJIIndoorLoc not found under " + root.string() +
                " (set NOBLE_DATA_DIR); manual download required");

  const auto start = std::chrono::steady_clock::now();
  // The published evaluation protocol: 3,987 of the 19,937 training rows
  // reserved by a seeded shuffle.
  const WifiCorpus corpus =
      normalize_rssi(load_ujiindoorloc(uji_train.string(), "", 808));

  {
    // Corpus shape checks: the coordinate extent and the occupied-cell
    // count at tau=0.2, against an independent hash-set count.
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (const WifiSample& s : corpus.train) {
      min_x = std::min(min_x, s.position.x);
      max_x = std::max(max_x, s.position.x);
      min_y = std::min(min_y, s.position.y);
      max_y = std::max(max_y, s.position.y);
    }
    const double width = max_x - min_x;
    const double height = max_y - min_y;
    const bool extent_ok =
        (std::abs(width - 397.0) <= 10.0 && std::abs(height - 273.0) <= 10.0) ||
        (std::abs(width - 273.0) <= 10.0 && std::abs(height - 397.0) <= 10.0);
    if (!extent_ok)
      return fail("UJIIndoorLoc extent " + fmt(width, 4) + "x" + fmt(height, 4) +
                  "m is not ~397x273m");

    const std::vector<Point2> points = positions_of(corpus.train);
    const CellMap map = build_cell_map(GridSpec::fit(points, 0.2), points);
    std::set<std::pair<std::int64_t, std::int64_t>> oracle;
    const GridSpec grid = map.spec();
    for (const Point2& p : points) {
      const CellIndex cell = quantize(grid, p);
      oracle.insert({cell.ix, cell.iy});
      if (!map.occupied(p)) return fail("a training sample misses its cell");
    }
    if (static_cast<std::size_t>(map.k_fine()) != oracle.size() ||
        map.k_fine() > static_cast<int>(points.size()))
      return fail("occupied-cell count disagrees with the hash-set oracle");
  }

  TrainConfig config;
  config.epochs = 150;
  config.batch_size = 64;
  config.seed = 808;
  config.patience = 20;

  const double tau = 0.2;
  WifiModel model = build_wifi_model(corpus, tau, 1.0, true, 808);
  train_wifi(model, corpus, config);
  const MetricsReport noble_report = evaluate_wifi(model, corpus.test);

  const RegressionBaseline regression =
      deep_regression(corpus, config, tau, model.map);

  std::ostringstream detail;
  detail << "UJIIndoorLoc mean " << fmt(noble_report.mean_error_m, 4)
         << "m median " << fmt(noble_report.median_error_m, 4) << "m building "
         << fmt(100 * noble_report.hit_rates.at("building"), 4) << "% floor "
         << fmt(100 * noble_report.hit_rates.at("floor"), 4)
         << "% vs regression mean " << fmt(regression.report.mean_error_m, 4)
         << "m";

  bool ok = noble_report.mean_error_m <= 9.0 &&
            noble_report.median_error_m <= 2.0 &&
            noble_report.hit_rates.at("building") >= 0.98 &&
            noble_report.hit_rates.at("floor") >= 0.90 &&
            noble_report.mean_error_m < regression.report.mean_error_m;

  const fs::path ipin = root / "IPIN2016" / "ipin2016.csv";
  if (fs::exists(ipin)) {
    const WifiCorpus ipin_corpus =
        normalize_rssi(load_ipin2016(ipin.string(), 808));
    WifiHeadOptions heads;
    heads.building = false;
    heads.floor = false;
    heads.space = true;
    WifiModel ipin_model =
        build_wifi_model(ipin_corpus, tau, std::nullopt, true, 808, heads);
    train_wifi(ipin_model, ipin_corpus, config);
    const MetricsReport ipin_report = evaluate_wifi(ipin_model, ipin_corpus.test);
    const std::vector<Point2> ipin_points = positions_of(ipin_corpus.train);
    const CellMap ipin_map =
        build_cell_map(GridSpec::fit(ipin_points, tau), ipin_points);
    const RegressionBaseline ipin_reg =
        deep_regression(ipin_corpus, config, tau, ipin_map);
    detail << "; IPIN2016 mean " << fmt(ipin_report.mean_error_m, 4)
           << "m vs regression " << fmt(ipin_reg.report.mean_error_m, 4) << "m";
    ok = ok && ipin_report.mean_error_m <= 2.5 &&
         ipin_report.mean_error_m < ipin_reg.report.mean_error_m;
  } else {
    detail << "; IPIN2016 not present, UJI only";
  }

  const double elapsed = seconds_since(start);
  detail << "; " << fmt(elapsed, 4) << "s";
  if (elapsed >= 7200.0) return fail(detail.str() + " over the 2h budget");
  return ok ? pass(detail.str()) : fail(detail.str());
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", criterion_gradients},
      {2, "sigmoid rewrite identity", criterion_sigmoid_rewrite},
      {3, "quantizer geometry", criterion_quantizer},
      {4, "proposition check", criterion_proposition},
      {5, "oracle equivalence", criterion_oracles},
      {6, "structure awareness (synthetic wifi)", criterion_structure_awareness},
      {7, "synthetic imu tracking", criterion_imu},
      {8, "real-data reproduction (optional)", criterion_real_data},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = fail(std::string("exception: ") + e.what());
    }
    const char* tag = outcome.kind == Outcome::Kind::pass   ? "PASS"
                      : outcome.kind == Outcome::Kind::skip ? "SKIP"
                                                            : "FAIL";
    if (outcome.kind == Outcome::Kind::fail) ++failures;
    std::cout << tag << " criterion " << criterion.id << ": " << criterion.name
              << " -- " << outcome.detail << "\n"
              << std::flush;
  }
  std::cout << "SKIP criterion 9: energy measurements -- hardware-specific, "
               "excluded by design\n";
  return failures == 0 ? 0 : 1;
}
