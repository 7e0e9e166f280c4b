#include "noble/wifi_model.hpp"

#include "noble/error.hpp"
#include "noble/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace noble {

using nlohmann::ordered_json;

int HeadSpec::index_of(int raw_id) const {
  const auto it = std::lower_bound(raw_ids.begin(), raw_ids.end(), raw_id);
  if (it == raw_ids.end() || *it != raw_id) return -1;
  return static_cast<int>(it - raw_ids.begin());
}

int WifiModelSpec::output_dim() const {
  int total = 0;
  for (const HeadSpec& h : heads) total += h.size;
  return total;
}

const HeadSpec& WifiModelSpec::head(const std::string& name) const {
  for (const HeadSpec& h : heads)
    if (h.name == name) return h;
  throw Error("model has no head named '" + name + "'");
}

bool WifiModelSpec::has_head(const std::string& name) const {
  for (const HeadSpec& h : heads)
    if (h.name == name) return true;
  return false;
}

namespace {

std::vector<int> distinct_ids(const std::vector<WifiSample>& samples,
                              std::optional<int> WifiSample::*field) {
  std::set<int> ids;
  for (const WifiSample& s : samples)
    if (s.*field) ids.insert(*(s.*field));
  return {ids.begin(), ids.end()};
}

void finalize_offsets(WifiModelSpec& spec) {
  int offset = 0;
  for (HeadSpec& h : spec.heads) {
    h.offset = offset;
    offset += h.size;
  }
}

}  // namespace

WifiModel build_wifi_model(const WifiCorpus& corpus, double tau,
                           std::optional<double> coarse_side, bool adjacency,
                           std::uint64_t seed, const WifiHeadOptions& options) {
  if (!corpus.normalization)
    throw ConfigError("build_wifi_model expects a normalized corpus");
  if (corpus.train.empty()) throw EmptyDataset("empty training split");

  WifiModel model;
  model.spec.input_dim = corpus.wap_count;
  model.spec.adjacency = adjacency;
  model.spec.tau = tau;
  model.spec.coarse_side = coarse_side;

  const std::vector<Point2> train_points = positions_of(corpus.train);
  const GridSpec grid = GridSpec::fit(train_points, tau, coarse_side);
  model.map = build_cell_map(grid, train_points);

  auto add_id_head = [&](const char* name,
                         std::optional<int> WifiSample::*field) {
    std::vector<int> ids = distinct_ids(corpus.train, field);
    if (ids.empty()) return;
    HeadSpec head;
    head.name = name;
    head.size = static_cast<int>(ids.size());
    head.raw_ids = std::move(ids);
    model.spec.heads.push_back(std::move(head));
  };
  if (options.building) add_id_head("building", &WifiSample::building);
  if (options.floor) add_id_head("floor", &WifiSample::floor);
  if (options.space) add_id_head("space", &WifiSample::space_id);
  if (coarse_side) {
    HeadSpec coarse;
    coarse.name = "coarse";
    coarse.size = model.map.k_coarse();
    model.spec.heads.push_back(std::move(coarse));
  }
  HeadSpec fine;
  fine.name = "fine";
  fine.size = model.map.k_fine();
  model.spec.heads.push_back(std::move(fine));
  finalize_offsets(model.spec);

  model.net = Network::mlp(model.spec.input_dim, model.spec.hidden,
                           model.spec.output_dim(), seed);
  return model;
}

Matrix wifi_targets(const WifiModel& model,
                    const std::vector<WifiSample>& samples,
                    bool with_adjacency) {
  const WifiModelSpec& spec = model.spec;
  Matrix targets = Matrix::Zero(static_cast<Eigen::Index>(samples.size()),
                                spec.output_dim());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const WifiSample& s = samples[i];
    const auto row = static_cast<Eigen::Index>(i);
    const QuantizedLabel label = label_sample(model.map, s.position,
                                              with_adjacency);
    for (const HeadSpec& head : spec.heads) {
      if (head.name == "fine") {
        targets(row, head.offset + label.fine_class) = 1.0;
        for (int extra : label.extra_classes)
          targets(row, head.offset + extra) = 1.0;
      } else if (head.name == "coarse") {
        if (!label.coarse_class)
          throw UnoccupiedCell("sample falls outside the coarse grid");
        targets(row, head.offset + *label.coarse_class) = 1.0;
      } else {
        std::optional<int> raw;
        if (head.name == "building") raw = s.building;
        if (head.name == "floor") raw = s.floor;
        if (head.name == "space") raw = s.space_id;
        if (!raw)
          throw Error("sample lacks the '" + head.name + "' label");
        const int index = head.index_of(*raw);
        if (index < 0)
          throw Error("unseen " + head.name + " ID " + std::to_string(*raw));
        targets(row, head.offset + index) = 1.0;
      }
    }
  }
  return targets;
}

namespace {

/// Test rows usable for validation: all head labels must exist under the
/// training cell map.
std::vector<WifiSample> labelable_rows(const WifiModel& model,
                                       const std::vector<WifiSample>& rows) {
  std::vector<WifiSample> usable;
  for (const WifiSample& s : rows) {
    if (!model.map.occupied(s.position)) continue;
    bool ok = true;
    for (const HeadSpec& head : model.spec.heads) {
      if (head.name == "building")
        ok = ok && s.building && head.index_of(*s.building) >= 0;
      else if (head.name == "floor")
        ok = ok && s.floor && head.index_of(*s.floor) >= 0;
      else if (head.name == "space")
        ok = ok && s.space_id && head.index_of(*s.space_id) >= 0;
      else if (head.name == "coarse")
        ok = ok && model.map
                       .coarse_class_of(quantize(model.map.spec(), s.position,
                                                 *model.map.spec().coarse_side))
                       .has_value();
    }
    if (ok) usable.push_back(s);
  }
  return usable;
}

}  // namespace

TrainTrace train_wifi(WifiModel& model, const WifiCorpus& corpus,
                      const TrainConfig& config) {
  if (!corpus.normalization)
    throw ConfigError("train_wifi expects a normalized corpus");
  const Matrix inputs = rssi_matrix(corpus.train);
  const Matrix targets = wifi_targets(model, corpus.train,
                                      model.spec.adjacency);
  if (corpus.test.empty())
    return train(model.net, inputs, targets, LossKind::bce, config);

  const std::vector<WifiSample> val_rows = labelable_rows(model, corpus.test);
  if (val_rows.empty())
    return train(model.net, inputs, targets, LossKind::bce, config);
  const Matrix val_inputs = rssi_matrix(val_rows);
  // Validation scores the exact labels only; adjacency extras are a
  // training-time densification.
  const Matrix val_targets = wifi_targets(model, val_rows, false);
  return train(model.net, inputs, targets, LossKind::bce, config, &val_inputs,
               &val_targets);
}

namespace {

int argmax_in_head(const Matrix& probs, Eigen::Index row,
                   const HeadSpec& head) {
  int best = 0;
  double best_score = -1.0;
  for (int j = 0; j < head.size; ++j) {
    const double score = probs(row, head.offset + j);
    if (score > best_score) {  // strict: ties keep the lower class ID
      best_score = score;
      best = j;
    }
  }
  return best;
}

WifiPrediction prediction_from_row(const WifiModel& model, const Matrix& probs,
                                   Eigen::Index row) {
  WifiPrediction pred;
  for (const HeadSpec& head : model.spec.heads) {
    const int index = argmax_in_head(probs, row, head);
    const int id = head.raw_ids.empty()
                       ? index
                       : head.raw_ids[static_cast<std::size_t>(index)];
    pred.head_ids[head.name] = id;
    pred.head_scores[head.name] = probs(row, head.offset + index);
    if (head.name == "fine") pred.position = model.map.fine_centroid(index);
  }
  return pred;
}

}  // namespace

WifiPrediction predict_wifi(const WifiModel& model,
                            const std::vector<double>& rssi) {
  if (static_cast<int>(rssi.size()) != model.spec.input_dim)
    throw DimensionMismatch("RSSI vector length does not match the model");
  Matrix input(1, model.spec.input_dim);
  for (int j = 0; j < model.spec.input_dim; ++j) input(0, j) = rssi[static_cast<std::size_t>(j)];
  WifiModel& mutable_model = const_cast<WifiModel&>(model);
  mutable_model.net.set_mode(Network::Mode::inference);
  const ForwardResult out = mutable_model.net.forward(input);
  return prediction_from_row(model, out.probs, 0);
}

std::vector<WifiPrediction> predict_wifi_batch(
    const WifiModel& model, const std::vector<WifiSample>& samples) {
  const Matrix inputs = rssi_matrix(samples);
  WifiModel& mutable_model = const_cast<WifiModel&>(model);
  mutable_model.net.set_mode(Network::Mode::inference);
  const ForwardResult out = mutable_model.net.forward(inputs);
  std::vector<WifiPrediction> predictions;
  predictions.reserve(samples.size());
  for (Eigen::Index row = 0; row < inputs.rows(); ++row)
    predictions.push_back(prediction_from_row(model, out.probs, row));
  return predictions;
}

MetricsReport evaluate_wifi(const WifiModel& model,
                            const std::vector<WifiSample>& split,
                            std::map<std::string, std::string> config) {
  if (split.empty()) throw EmptyEvaluation("empty evaluation split");
  const std::vector<WifiPrediction> predictions =
      predict_wifi_batch(model, split);

  std::vector<double> errors(split.size());
  std::vector<bool> off_map(split.size());
  std::map<std::string, std::vector<bool>> hits;
  for (const HeadSpec& head : model.spec.heads)
    hits[head.name].resize(split.size());

  for (std::size_t i = 0; i < split.size(); ++i) {
    const WifiSample& s = split[i];
    const WifiPrediction& pred = predictions[i];
    errors[i] = position_error(pred.position, s.position);
    off_map[i] = !model.map.occupied(pred.position);

    // Grid-head truth exists only when the true position lands on an
    // occupied training cell; everything else counts as a miss.
    std::optional<int> true_fine, true_coarse;
    if (model.map.spec().bounds.contains(s.position)) {
      true_fine = model.map.fine_class_of(quantize(model.map.spec(), s.position));
      if (model.map.has_coarse())
        true_coarse = model.map.coarse_class_of(
            quantize(model.map.spec(), s.position, *model.map.spec().coarse_side));
    }
    for (const HeadSpec& head : model.spec.heads) {
      const int predicted = pred.head_ids.at(head.name);
      bool hit = false;
      if (head.name == "fine") {
        hit = true_fine && *true_fine == predicted;
      } else if (head.name == "coarse") {
        hit = true_coarse && *true_coarse == predicted;
      } else if (head.name == "building") {
        hit = s.building && *s.building == predicted;
      } else if (head.name == "floor") {
        hit = s.floor && *s.floor == predicted;
      } else if (head.name == "space") {
        hit = s.space_id && *s.space_id == predicted;
      }
      hits[head.name][i] = hit;
    }
  }

  config.emplace("tau", format_double(model.spec.tau));
  if (model.spec.coarse_side)
    config.emplace("coarse_side", format_double(*model.spec.coarse_side));
  config.emplace("adjacency", model.spec.adjacency ? "on" : "off");
  return summarize(errors, hits, off_map, std::move(config));
}

void save_wifi_model(const WifiModel& model, const std::string& dir) {
  ordered_json j;
  j["kind"] = "wifi-noble";
  j["input_dim"] = model.spec.input_dim;
  j["hidden"] = model.spec.hidden;
  j["adjacency"] = model.spec.adjacency;
  j["tau"] = model.spec.tau;
  if (model.spec.coarse_side) j["coarse_side"] = *model.spec.coarse_side;
  ordered_json heads = ordered_json::array();
  for (const HeadSpec& head : model.spec.heads) {
    ordered_json h;
    h["name"] = head.name;
    h["offset"] = head.offset;
    h["size"] = head.size;
    h["raw_ids"] = head.raw_ids;
    heads.push_back(h);
  }
  j["heads"] = heads;
  atomic_write_file(dir + "/model.json", j.dump(2) + "\n");
  save_cell_map(model.map, dir + "/cellmap.txt");
  save_network(model.net, dir + "/model.nnet");
}

WifiModel load_wifi_model(const std::string& dir) {
  const auto j = ordered_json::parse(read_file(dir + "/model.json"));
  if (j.at("kind").get<std::string>() != "wifi-noble")
    throw FormatError(dir + " is not a wifi model directory", 1, 1);
  WifiModel model;
  model.spec.input_dim = j.at("input_dim").get<int>();
  model.spec.hidden = j.at("hidden").get<std::vector<int>>();
  model.spec.adjacency = j.at("adjacency").get<bool>();
  model.spec.tau = j.at("tau").get<double>();
  if (j.contains("coarse_side"))
    model.spec.coarse_side = j.at("coarse_side").get<double>();
  for (const auto& h : j.at("heads")) {
    HeadSpec head;
    head.name = h.at("name").get<std::string>();
    head.offset = h.at("offset").get<int>();
    head.size = h.at("size").get<int>();
    head.raw_ids = h.at("raw_ids").get<std::vector<int>>();
    model.spec.heads.push_back(std::move(head));
  }
  model.map = load_cell_map(dir + "/cellmap.txt");
  model.net = load_network(dir + "/model.nnet");
  return model;
}

}  // namespace noble
