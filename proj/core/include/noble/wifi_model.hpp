#pragma once

#include "noble/dataset.hpp"
#include "noble/grid.hpp"
#include "noble/metrics.hpp"
#include "noble/nn.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace noble {

/// One output head over the concatenated multi-hot label space. ID heads
/// (building/floor/space) carry the sorted distinct raw IDs seen in
/// training; grid heads (coarse/fine) use cell-map class IDs directly.
struct HeadSpec {
  std::string name;
  int offset = 0;
  int size = 0;
  std::vector<int> raw_ids;  // empty for grid heads

  int index_of(int raw_id) const;  // -1 when unseen
};

struct WifiModelSpec {
  int input_dim = 0;
  std::vector<int> hidden{128, 128};
  bool adjacency = true;
  double tau = 0.2;
  std::optional<double> coarse_side;
  std::vector<HeadSpec> heads;  // building?, floor?, space?, coarse?, fine

  int output_dim() const;
  const HeadSpec& head(const std::string& name) const;
  bool has_head(const std::string& name) const;
};

/// Which ID heads to wire up when the corpus provides the fields. The
/// coarse grid head follows coarse_side; the fine head always exists.
struct WifiHeadOptions {
  bool building = true;
  bool floor = true;
  bool space = false;
};

struct WifiModel {
  WifiModelSpec spec;
  CellMap map;
  Network net;
};

struct WifiPrediction {
  std::map<std::string, int> head_ids;      // raw IDs / grid class IDs
  std::map<std::string, double> head_scores;
  Point2 position;  // centroid of the predicted fine cell
};

/// Builds the cell map from the training coordinates only, sizes the heads
/// from the training label spaces, and shapes the net
/// W -> hidden -> sum(head sizes) with tanh hidden activations.
WifiModel build_wifi_model(const WifiCorpus& corpus, double tau,
                           std::optional<double> coarse_side, bool adjacency,
                           std::uint64_t seed,
                           const WifiHeadOptions& options = {});

/// Concatenated multi-hot targets; adjacency extras are positive labels in
/// the fine head when enabled.
Matrix wifi_targets(const WifiModel& model,
                    const std::vector<WifiSample>& samples,
                    bool with_adjacency);

/// BCE training over the concatenated heads; validation runs on the test
/// rows whose labels exist under the training cell map.
TrainTrace train_wifi(WifiModel& model, const WifiCorpus& corpus,
                      const TrainConfig& config);

WifiPrediction predict_wifi(const WifiModel& model,
                            const std::vector<double>& rssi);
std::vector<WifiPrediction> predict_wifi_batch(
    const WifiModel& model, const std::vector<WifiSample>& samples);

/// Position errors, per-head hit rates and the off-map rate on a split.
MetricsReport evaluate_wifi(const WifiModel& model,
                            const std::vector<WifiSample>& split,
                            std::map<std::string, std::string> config = {});

/// Model directory: model.json + model.nnet + cellmap.txt.
void save_wifi_model(const WifiModel& model, const std::string& dir);
WifiModel load_wifi_model(const std::string& dir);

}  // namespace noble
