#pragma once

#include "noble/dataset.hpp"
#include "noble/grid.hpp"
#include "noble/metrics.hpp"
#include "noble/nn.hpp"

#include <optional>
#include <string>
#include <vector>

namespace noble {

/// End-location head: quantized cells (BCE) for the structure-aware
/// tracker, raw coordinates (MSE) for the regression baseline.
enum class ImuTask { classify, regress };

struct ImuModelSpec {
  int readings_per_segment = 0;  // d
  int sensor_axes = 0;           // n
  int projection_dim = 32;       // p
  int max_segments = 50;         // embedding slots, zero-padded
  std::vector<int> hidden{128, 128};
  double tau = 0.4;
  int reference_count = 0;  // start one-hot size
  ImuTask task = ImuTask::classify;

  int flat_segment_dim() const { return readings_per_segment * sensor_axes; }
  int embedding_dim() const { return max_segments * projection_dim; }
};

/// Three-stage tracker: a projection matrix shared across segment slots, a
/// displacement net over the concatenated embedding, and a location net
/// over [displacement, one-hot start].
struct ImuModel {
  ImuModelSpec spec;
  CellMap map;        // end positions of the training paths at tau
  Matrix projection;  // (d*n) x p, trainable, no bias
  Network displacement_net;  // embedding_dim -> hidden -> 2
  Network location_net;      // (2 + reference_count) -> hidden -> K or 2
  // Regression-task target standardization.
  double mean_x = 0, mean_y = 0, std_x = 1, std_y = 1;
};

ImuModel build_imu_model(const ImuCorpus& corpus, double tau,
                         std::uint64_t seed, ImuTask task = ImuTask::classify,
                         int projection_dim = 32, int max_segments = 50);

/// Row-major flattened segments times the shared projection, concatenated
/// in slot order; slots past the path length stay zero. Length 50p.
Vector project_segments(const ImuModel& model, const ImuCorpus& corpus,
                        const ImuPath& path);

struct ImuForward {
  Matrix displacement;     // batch x 2 (V)
  Matrix location_logits;  // batch x K (or batch x 2 for regression)
  Matrix location_probs;   // sigmoid(logits)
};

/// Inference-mode forward over a path batch. Throws UnknownStartLocation
/// when a start reference ID is outside the corpus reference set.
ImuForward forward_imu(const ImuModel& model, const ImuCorpus& corpus,
                       const std::vector<std::size_t>& path_indices);

struct ImuTrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = -1;
};

/// Joint training: BCE over the end-cell multi-hot plus aux_weight times
/// the displacement MSE against the exact end-start ground truth (the
/// regression task swaps the classification term for coordinate MSE).
/// Early stopping follows the corpus validation split.
ImuTrainReport train_imu(ImuModel& model, const ImuCorpus& corpus,
                         const TrainConfig& config, double aux_weight = 0.1);

/// Training-mode composite loss over the given paths. With a non-null
/// projection_grad, one reverse pass accumulates parameter gradients there
/// and into the two networks' layers; the gradient-check tests drive this.
double imu_training_loss(ImuModel& model, const ImuCorpus& corpus,
                         const std::vector<std::size_t>& path_indices,
                         double aux_weight, Matrix* projection_grad = nullptr);

/// Argmax end cell (ties toward the lower ID) -> cell centroid; the
/// regression task returns the de-standardized coordinates.
Point2 predict_end_position(const ImuModel& model, const ImuCorpus& corpus,
                            std::size_t path_index);

MetricsReport evaluate_imu(const ImuModel& model, const ImuCorpus& corpus,
                           const std::vector<std::size_t>& path_indices,
                           std::map<std::string, std::string> config = {});

/// Model directory: model.json + projection.nnet + displacement.nnet +
/// location.nnet + cellmap.txt.
void save_imu_model(const ImuModel& model, const std::string& dir);
ImuModel load_imu_model(const std::string& dir);

}  // namespace noble
