#include "noble/imu_model.hpp"

#include "noble/error.hpp"
#include "noble/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace noble {

using nlohmann::ordered_json;

namespace {

Vector flatten_row_major(const Matrix& segment) {
  Vector flat(segment.size());
  Eigen::Index at = 0;
  for (Eigen::Index r = 0; r < segment.rows(); ++r)
    for (Eigen::Index c = 0; c < segment.cols(); ++c) flat(at++) = segment(r, c);
  return flat;
}

std::vector<Point2> train_end_positions(const ImuCorpus& corpus) {
  std::vector<Point2> ends;
  ends.reserve(corpus.train_idx.size());
  for (std::size_t idx : corpus.train_idx)
    ends.push_back(corpus.paths.at(idx).end_position);
  return ends;
}

void check_paths(const ImuModel& model, const ImuCorpus& corpus,
                 const std::vector<std::size_t>& indices) {
  for (std::size_t idx : indices) {
    const ImuPath& path = corpus.paths.at(idx);
    if (path.start_ref < 0 ||
        path.start_ref >= model.spec.reference_count)
      throw UnknownStartLocation("path start reference " +
                                 std::to_string(path.start_ref) +
                                 " outside the reference set");
    if (path.length() == 0 ||
        path.length() > static_cast<std::size_t>(model.spec.max_segments))
      throw DimensionMismatch("path length outside [1, max_segments]");
  }
}

/// Per-batch projection workspace: flattened rows for the segments a batch
/// touches, so both the forward product and the weight gradient run as one
/// GEMM each.
struct BatchSlots {
  std::vector<std::size_t> segment_ids;  // batch-unique, ascending
  Matrix flat;                           // one row per unique segment
  std::unordered_map<std::size_t, Eigen::Index> row_of;
};

BatchSlots gather_slots(const ImuModel& model, const ImuCorpus& corpus,
                        const std::vector<std::size_t>& indices) {
  BatchSlots slots;
  for (std::size_t idx : indices)
    for (std::size_t sid : corpus.paths.at(idx).segment_ids)
      if (slots.row_of.emplace(sid, static_cast<Eigen::Index>(slots.segment_ids.size())).second)
        slots.segment_ids.push_back(sid);
  slots.flat.resize(static_cast<Eigen::Index>(slots.segment_ids.size()),
                    model.spec.flat_segment_dim());
  for (std::size_t r = 0; r < slots.segment_ids.size(); ++r) {
    const Matrix& seg = corpus.segments.at(slots.segment_ids[r]);
    if (seg.rows() != model.spec.readings_per_segment ||
        seg.cols() != model.spec.sensor_axes)
      throw DimensionMismatch("segment shape does not match the model");
    slots.flat.row(static_cast<Eigen::Index>(r)) =
        flatten_row_major(seg).transpose();
  }
  return slots;
}

Matrix assemble_embedding(const ImuModel& model, const ImuCorpus& corpus,
                          const std::vector<std::size_t>& indices,
                          const BatchSlots& slots) {
  const int p = model.spec.projection_dim;
  const Matrix projected = slots.flat * model.projection;  // unique x p
  Matrix embedding = Matrix::Zero(static_cast<Eigen::Index>(indices.size()),
                                  model.spec.embedding_dim());
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const ImuPath& path = corpus.paths.at(indices[b]);
    for (std::size_t t = 0; t < path.length(); ++t) {
      embedding.block(static_cast<Eigen::Index>(b),
                      static_cast<Eigen::Index>(t) * p, 1, p) =
          projected.row(slots.row_of.at(path.segment_ids[t]));
    }
  }
  return embedding;
}

/// Scatters the embedding gradient back onto per-segment rows and folds it
/// into the projection gradient: slot gradients accumulate across all 50
/// slots through one flat^T * S product.
void accumulate_projection_grad(const ImuModel& model, const ImuCorpus& corpus,
                                const std::vector<std::size_t>& indices,
                                const BatchSlots& slots,
                                const Matrix& embedding_grad,
                                Matrix& projection_grad) {
  const int p = model.spec.projection_dim;
  Matrix per_segment = Matrix::Zero(
      static_cast<Eigen::Index>(slots.segment_ids.size()), p);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const ImuPath& path = corpus.paths.at(indices[b]);
    for (std::size_t t = 0; t < path.length(); ++t) {
      per_segment.row(slots.row_of.at(path.segment_ids[t])) +=
          embedding_grad.block(static_cast<Eigen::Index>(b),
                               static_cast<Eigen::Index>(t) * p, 1, p);
    }
  }
  projection_grad.noalias() += slots.flat.transpose() * per_segment;
}

Matrix one_hot_inputs(const ImuModel& model, const ImuCorpus& corpus,
                      const std::vector<std::size_t>& indices,
                      const Matrix& displacement) {
  Matrix in = Matrix::Zero(displacement.rows(),
                           2 + model.spec.reference_count);
  in.leftCols(2) = displacement;
  for (std::size_t b = 0; b < indices.size(); ++b)
    in(static_cast<Eigen::Index>(b),
       2 + corpus.paths.at(indices[b]).start_ref) = 1.0;
  return in;
}

Matrix classify_targets(const ImuModel& model, const ImuCorpus& corpus,
                        const std::vector<std::size_t>& indices) {
  Matrix targets = Matrix::Zero(static_cast<Eigen::Index>(indices.size()),
                                model.map.k_fine());
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const Point2 end = corpus.paths.at(indices[b]).end_position;
    const QuantizedLabel label = label_sample(model.map, end, false);
    targets(static_cast<Eigen::Index>(b), label.fine_class) = 1.0;
  }
  return targets;
}

Matrix displacement_truth(const ImuCorpus& corpus,
                          const std::vector<std::size_t>& indices) {
  Matrix truth(static_cast<Eigen::Index>(indices.size()), 2);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const ImuPath& path = corpus.paths.at(indices[b]);
    truth(static_cast<Eigen::Index>(b), 0) =
        path.end_position.x - path.start_position.x;
    truth(static_cast<Eigen::Index>(b), 1) =
        path.end_position.y - path.start_position.y;
  }
  return truth;
}

Matrix regression_targets(const ImuModel& model, const ImuCorpus& corpus,
                          const std::vector<std::size_t>& indices) {
  Matrix targets(static_cast<Eigen::Index>(indices.size()), 2);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const Point2 end = corpus.paths.at(indices[b]).end_position;
    targets(static_cast<Eigen::Index>(b), 0) = (end.x - model.mean_x) / model.std_x;
    targets(static_cast<Eigen::Index>(b), 1) = (end.y - model.mean_y) / model.std_y;
  }
  return targets;
}

}  // namespace

ImuModel build_imu_model(const ImuCorpus& corpus, double tau,
                         std::uint64_t seed, ImuTask task, int projection_dim,
                         int max_segments) {
  if (corpus.paths.empty()) throw EmptyDataset("corpus has no paths");
  if (corpus.train_idx.empty()) throw EmptyDataset("corpus has no training split");
  if (max_segments < 1 || max_segments > 50)
    throw ConfigError("max_segments must be in [1, 50]");

  ImuModel model;
  model.spec.readings_per_segment = corpus.readings_per_segment;
  model.spec.sensor_axes = corpus.sensor_axes;
  model.spec.projection_dim = projection_dim;
  model.spec.max_segments = max_segments;
  model.spec.tau = tau;
  model.spec.reference_count =
      static_cast<int>(corpus.reference_locations.size());
  model.spec.task = task;

  const std::vector<Point2> ends = train_end_positions(corpus);
  model.map = build_cell_map(GridSpec::fit(ends, tau), ends);

  std::mt19937_64 rng(seed);
  model.projection =
      xavier_init(model.spec.flat_segment_dim(), projection_dim, rng);
  model.displacement_net = Network::mlp(model.spec.embedding_dim(),
                                        model.spec.hidden, 2, rng());
  const int head = task == ImuTask::classify ? model.map.k_fine() : 2;
  model.location_net = Network::mlp(2 + model.spec.reference_count,
                                    model.spec.hidden, head, rng());

  if (task == ImuTask::regress) {
    Matrix coords(static_cast<Eigen::Index>(ends.size()), 2);
    for (std::size_t i = 0; i < ends.size(); ++i) {
      coords(static_cast<Eigen::Index>(i), 0) = ends[i].x;
      coords(static_cast<Eigen::Index>(i), 1) = ends[i].y;
    }
    model.mean_x = coords.col(0).mean();
    model.mean_y = coords.col(1).mean();
    model.std_x = std::max(
        std::sqrt((coords.col(0).array() - model.mean_x).square().mean()), 1e-9);
    model.std_y = std::max(
        std::sqrt((coords.col(1).array() - model.mean_y).square().mean()), 1e-9);
  }
  return model;
}

Vector project_segments(const ImuModel& model, const ImuCorpus& corpus,
                        const ImuPath& path) {
  if (path.length() > static_cast<std::size_t>(model.spec.max_segments))
    throw DimensionMismatch("path longer than the model's slot count");
  const int p = model.spec.projection_dim;
  Vector embedding = Vector::Zero(model.spec.embedding_dim());
  for (std::size_t t = 0; t < path.length(); ++t) {
    const Matrix& seg = corpus.segments.at(path.segment_ids[t]);
    if (seg.rows() != model.spec.readings_per_segment ||
        seg.cols() != model.spec.sensor_axes)
      throw DimensionMismatch("segment shape does not match the model");
    embedding.segment(static_cast<Eigen::Index>(t) * p, p) =
        (flatten_row_major(seg).transpose() * model.projection).transpose();
  }
  return embedding;
}

namespace {

ImuForward forward_internal(ImuModel& model, const ImuCorpus& corpus,
                            const std::vector<std::size_t>& indices,
                            const BatchSlots& slots, bool training) {
  const Matrix embedding = assemble_embedding(model, corpus, indices, slots);
  const Network::Mode mode =
      training ? Network::Mode::training : Network::Mode::inference;
  model.displacement_net.set_mode(mode);
  model.location_net.set_mode(mode);
  ImuForward out;
  out.displacement = model.displacement_net.forward(embedding).logits;
  const Matrix loc_in = one_hot_inputs(model, corpus, indices, out.displacement);
  const ForwardResult loc = model.location_net.forward(loc_in);
  out.location_logits = loc.logits;
  out.location_probs = loc.probs;
  return out;
}

}  // namespace

ImuForward forward_imu(const ImuModel& model, const ImuCorpus& corpus,
                       const std::vector<std::size_t>& path_indices) {
  check_paths(model, corpus, path_indices);
  const BatchSlots slots = gather_slots(model, corpus, path_indices);
  ImuModel& mutable_model = const_cast<ImuModel&>(model);
  return forward_internal(mutable_model, corpus, path_indices, slots, false);
}

double imu_training_loss(ImuModel& model, const ImuCorpus& corpus,
                         const std::vector<std::size_t>& path_indices,
                         double aux_weight, Matrix* projection_grad) {
  check_paths(model, corpus, path_indices);
  const bool classify = model.spec.task == ImuTask::classify;
  const BatchSlots slots = gather_slots(model, corpus, path_indices);
  const ImuForward out =
      forward_internal(model, corpus, path_indices, slots, true);

  double value = 0.0;
  Matrix dlogits;
  Matrix dv_extra =
      Matrix::Zero(static_cast<Eigen::Index>(path_indices.size()), 2);
  if (classify) {
    const Matrix targets = classify_targets(model, corpus, path_indices);
    LossResult loss = bce_loss(out.location_probs, targets);
    value = loss.value;
    dlogits = std::move(loss.logit_grad);
    if (aux_weight > 0.0) {
      LossResult aux = mse_loss(out.displacement,
                                displacement_truth(corpus, path_indices));
      value += aux_weight * aux.value;
      dv_extra = aux_weight * aux.logit_grad;
    }
  } else {
    LossResult loss = mse_loss(out.location_logits,
                               regression_targets(model, corpus, path_indices));
    value = loss.value;
    dlogits = std::move(loss.logit_grad);
  }
  if (projection_grad == nullptr) return value;

  model.displacement_net.zero_grad();
  model.location_net.zero_grad();
  const Matrix dloc_in = model.location_net.backward(dlogits);
  const Matrix dv = dloc_in.leftCols(2) + dv_extra;
  const Matrix dembedding = model.displacement_net.backward(dv);
  accumulate_projection_grad(model, corpus, path_indices, slots, dembedding,
                             *projection_grad);
  return value;
}

ImuTrainReport train_imu(ImuModel& model, const ImuCorpus& corpus,
                         const TrainConfig& config, double aux_weight) {
  config.validate();
  check_paths(model, corpus, corpus.train_idx);
  const bool classify = model.spec.task == ImuTask::classify;

  Matrix projection_grad =
      Matrix::Zero(model.projection.rows(), model.projection.cols());
  std::vector<ParamView> params{{model.projection.data(),
                                 projection_grad.data(),
                                 model.projection.size()}};
  for (const ParamView& p : model.displacement_net.parameters())
    params.push_back(p);
  for (const ParamView& p : model.location_net.parameters())
    params.push_back(p);
  Optimizer optimizer(config, std::move(params));

  // Validation paths must be labelable under the training cell map.
  std::vector<std::size_t> val_indices;
  for (std::size_t idx : corpus.val_idx) {
    const ImuPath& path = corpus.paths.at(idx);
    if (!classify || model.map.occupied(path.end_position))
      val_indices.push_back(idx);
  }

  auto composite_loss = [&](const std::vector<std::size_t>& indices,
                            bool training) {
    const BatchSlots slots = gather_slots(model, corpus, indices);
    const ImuForward out =
        forward_internal(model, corpus, indices, slots, training);
    double value = 0.0;
    if (classify) {
      const Matrix targets = classify_targets(model, corpus, indices);
      value = bce_loss(out.location_probs, targets).value;
      if (aux_weight > 0.0)
        value += aux_weight *
                 mse_loss(out.displacement, displacement_truth(corpus, indices))
                     .value;
    } else {
      value = mse_loss(out.location_logits,
                       regression_targets(model, corpus, indices))
                  .value;
    }
    return value;
  };

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order = corpus.train_idx;

  ImuTrainReport report;
  double best_val = std::numeric_limits<double>::infinity();
  std::string best_snapshot;
  int epochs_since_best = 0;

  auto snapshot_all = [&]() {
    std::ostringstream buffer;
    model.displacement_net.save(buffer);
    model.location_net.save(buffer);
    for (Eigen::Index i = 0; i < model.projection.size(); ++i)
      write_f64(buffer, model.projection.data()[i]);
    return buffer.str();
  };
  auto restore_all = [&](const std::string& snapshot) {
    std::istringstream in(snapshot);
    model.displacement_net = Network::load(in);
    model.location_net = Network::load(in);
    for (Eigen::Index i = 0; i < model.projection.size(); ++i)
      model.projection.data()[i] = read_f64(in);
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t count = std::min(
          static_cast<std::size_t>(config.batch_size), order.size() - start);
      const std::vector<std::size_t> batch(
          order.begin() + static_cast<std::ptrdiff_t>(start),
          order.begin() + static_cast<std::ptrdiff_t>(start + count));

      projection_grad.setZero();
      const double batch_value =
          imu_training_loss(model, corpus, batch, aux_weight, &projection_grad);
      if (!std::isfinite(batch_value))
        throw DivergedLoss("training loss became non-finite", epoch);
      optimizer.step();

      epoch_loss += batch_value * static_cast<double>(count);
      seen += count;
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(seen));

    if (!val_indices.empty()) {
      const double val = composite_loss(val_indices, false);
      if (!std::isfinite(val))
        throw DivergedLoss("validation loss became non-finite", epoch);
      report.val_loss.push_back(val);
      if (val < best_val) {
        best_val = val;
        report.best_epoch = epoch;
        best_snapshot = snapshot_all();
        epochs_since_best = 0;
      } else if (++epochs_since_best >= config.patience) {
        break;
      }
    }
  }

  if (!best_snapshot.empty()) restore_all(best_snapshot);
  model.displacement_net.set_mode(Network::Mode::inference);
  model.location_net.set_mode(Network::Mode::inference);
  return report;
}

Point2 predict_end_position(const ImuModel& model, const ImuCorpus& corpus,
                            std::size_t path_index) {
  const ImuForward out = forward_imu(model, corpus, {path_index});
  if (model.spec.task == ImuTask::regress) {
    return Point2{out.location_logits(0, 0) * model.std_x + model.mean_x,
                  out.location_logits(0, 1) * model.std_y + model.mean_y};
  }
  int best = 0;
  double best_score = -1.0;
  for (int j = 0; j < model.map.k_fine(); ++j) {
    const double score = out.location_probs(0, j);
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return model.map.fine_centroid(best);
}

MetricsReport evaluate_imu(const ImuModel& model, const ImuCorpus& corpus,
                           const std::vector<std::size_t>& path_indices,
                           std::map<std::string, std::string> config) {
  if (path_indices.empty()) throw EmptyEvaluation("no paths to evaluate");
  const ImuForward out = forward_imu(model, corpus, path_indices);
  const bool classify = model.spec.task == ImuTask::classify;

  std::vector<double> errors(path_indices.size());
  std::vector<bool> off_map(path_indices.size());
  std::map<std::string, std::vector<bool>> hits;
  if (classify) hits["location"].resize(path_indices.size());

  for (std::size_t b = 0; b < path_indices.size(); ++b) {
    const ImuPath& path = corpus.paths.at(path_indices[b]);
    Point2 predicted;
    if (classify) {
      int best = 0;
      double best_score = -1.0;
      for (int j = 0; j < model.map.k_fine(); ++j) {
        const double score = out.location_probs(static_cast<Eigen::Index>(b), j);
        if (score > best_score) {
          best_score = score;
          best = j;
        }
      }
      predicted = model.map.fine_centroid(best);
      std::optional<int> truth;
      if (model.map.spec().bounds.contains(path.end_position))
        truth = model.map.fine_class_of(
            quantize(model.map.spec(), path.end_position));
      hits["location"][b] = truth && *truth == best;
    } else {
      predicted =
          Point2{out.location_logits(static_cast<Eigen::Index>(b), 0) * model.std_x +
                     model.mean_x,
                 out.location_logits(static_cast<Eigen::Index>(b), 1) * model.std_y +
                     model.mean_y};
    }
    errors[b] = position_error(predicted, path.end_position);
    off_map[b] = !model.map.occupied(predicted);
  }

  config.emplace("tau", format_double(model.spec.tau));
  config.emplace("task", classify ? "classify" : "regress");
  return summarize(errors, hits, off_map, std::move(config));
}

void save_imu_model(const ImuModel& model, const std::string& dir) {
  ordered_json j;
  j["kind"] = "imu-noble";
  j["d"] = model.spec.readings_per_segment;
  j["n"] = model.spec.sensor_axes;
  j["projection_dim"] = model.spec.projection_dim;
  j["max_segments"] = model.spec.max_segments;
  j["hidden"] = model.spec.hidden;
  j["tau"] = model.spec.tau;
  j["reference_count"] = model.spec.reference_count;
  j["task"] = model.spec.task == ImuTask::classify ? "classify" : "regress";
  j["standardize"] = {model.mean_x, model.mean_y, model.std_x, model.std_y};
  atomic_write_file(dir + "/model.json", j.dump(2) + "\n");
  save_cell_map(model.map, dir + "/cellmap.txt");

  // The projection is stored as a single-linear-layer checkpoint.
  Network projection_net;
  std::mt19937_64 rng(0);
  projection_net.add_linear(static_cast<int>(model.projection.rows()),
                            static_cast<int>(model.projection.cols()), rng);
  std::vector<ParamView> views = projection_net.parameters();
  Eigen::Map<Matrix>(views[0].value, model.projection.cols(),
                     model.projection.rows()) = model.projection.transpose();
  save_network(projection_net, dir + "/projection.nnet");
  save_network(model.displacement_net, dir + "/displacement.nnet");
  save_network(model.location_net, dir + "/location.nnet");
}

ImuModel load_imu_model(const std::string& dir) {
  const auto j = ordered_json::parse(read_file(dir + "/model.json"));
  if (j.at("kind").get<std::string>() != "imu-noble")
    throw FormatError(dir + " is not an imu model directory", 1, 1);
  ImuModel model;
  model.spec.readings_per_segment = j.at("d").get<int>();
  model.spec.sensor_axes = j.at("n").get<int>();
  model.spec.projection_dim = j.at("projection_dim").get<int>();
  model.spec.max_segments = j.at("max_segments").get<int>();
  model.spec.hidden = j.at("hidden").get<std::vector<int>>();
  model.spec.tau = j.at("tau").get<double>();
  model.spec.reference_count = j.at("reference_count").get<int>();
  model.spec.task = j.at("task").get<std::string>() == "classify"
                        ? ImuTask::classify
                        : ImuTask::regress;
  model.mean_x = j.at("standardize").at(0).get<double>();
  model.mean_y = j.at("standardize").at(1).get<double>();
  model.std_x = j.at("standardize").at(2).get<double>();
  model.std_y = j.at("standardize").at(3).get<double>();
  model.map = load_cell_map(dir + "/cellmap.txt");

  Network projection_net = load_network(dir + "/projection.nnet");
  const Matrix& w = projection_net.last_linear_weight();  // p x (d*n)
  model.projection = w.transpose();
  model.displacement_net = load_network(dir + "/displacement.nnet");
  model.location_net = load_network(dir + "/location.nnet");
  return model;
}

}  // namespace noble
