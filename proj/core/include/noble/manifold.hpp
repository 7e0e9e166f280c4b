#pragma once

#include "noble/dataset.hpp"
#include "noble/grid.hpp"
#include "noble/metrics.hpp"
#include "noble/nn.hpp"
#include "noble/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace noble {

/// Symmetrized exact k-nearest-neighbor graph. Exactly-duplicate points are
/// collapsed onto one node (with a warning) so every edge weight is
/// positive; node_of_point maps original rows back onto nodes.
struct NeighborGraph {
  std::size_t node_count = 0;
  /// Per node: the k nearest nodes, ascending (distance, index).
  std::vector<std::vector<std::size_t>> knn;
  /// Symmetrized adjacency (union of directed kNN edges) with Euclidean
  /// weights, each list sorted by neighbor index.
  std::vector<std::vector<std::pair<std::size_t, double>>> edges;
  std::vector<std::size_t> node_of_point;   // original row -> node
  std::vector<std::size_t> point_of_node;   // representative row per node
  bool had_duplicates = false;
};

/// Brute-force exact kNN by Euclidean distance, ties broken by the lower
/// index. Throws DegenerateInput when there are not more (unique) points
/// than k.
NeighborGraph knn_graph(const Matrix& points, int k);

/// All-pairs shortest paths over the graph (Dijkstra per source). Throws
/// DisconnectedGraph listing component sizes.
Matrix geodesic_distances(const NeighborGraph& graph);

/// Classical (Torgerson) MDS of a symmetric zero-diagonal nonnegative
/// dissimilarity matrix: double-centered Gram, Jacobi eigendecomposition,
/// coordinates from the top-s nonnegative eigenpairs. Negative eigenvalues
/// are truncated to zero with a stderr conditioning warning.
Matrix classical_mds(const Matrix& distances, int s);

enum class EmbeddingMethod { isomap, lle };

/// A fitted nonlinear embedding over the training inputs with everything
/// needed to map held-out points into the same space.
struct EmbeddingModel {
  EmbeddingMethod method = EmbeddingMethod::isomap;
  int k = 0;
  int s = 0;
  /// Rows the out-of-sample mapping searches against (unique training
  /// points for Isomap, the fitted sample for LLE) and their embeddings.
  Matrix basis_points;
  Matrix basis_embedding;
  /// One embedding row per original training point.
  Matrix embedding;

  // Isomap landmark kernel data: geodesics from each landmark to every
  // basis row, the landmark MDS eigenpairs and mean squared distances.
  Matrix landmark_geodesics;
  Matrix landmark_eigenvectors;
  Vector landmark_eigenvalues;  // zero past the positive ones
  Vector landmark_mean_sq_dist;
};

/// Isomap: knn_graph -> geodesic_distances -> classical_mds. Above
/// landmark_cap nodes a seeded landmark subset anchors the MDS and every
/// other point is embedded through the landmark kernel formula.
EmbeddingModel isomap_fit(const Matrix& points, int k, int s,
                          std::size_t landmark_cap = 1000,
                          std::uint64_t seed = 0);

/// Locally linear embedding: per-point reconstruction weights from the
/// regularized local Gram system (rows sum to 1), then the bottom s+1
/// eigenvectors of (I-W)^T (I-W) discarding the constant one.
EmbeddingModel lle_fit(const Matrix& points, int k, int s,
                       std::size_t landmark_cap = 1000,
                       std::uint64_t seed = 0);

/// Maps held-out rows into the fitted embedding space: landmark kernel
/// interpolation for Isomap, reconstruction-weight projection for LLE.
Matrix embed_out_of_sample(const EmbeddingModel& model, const Matrix& queries);

/// LLE reconstruction weights of `row` against its k nearest training rows;
/// exposed for the weight-constraint checks.
Vector lle_weights(const Matrix& neighbors, const Vector& row, int s);

// ---------------------------------------------------------------------------
// Comparison models

/// Position metrics for a prediction list: errors, plus the off-map rate
/// against the occupied cells of `map`.
MetricsReport evaluate_positions(const std::vector<Point2>& predictions,
                                 const std::vector<Point2>& truths,
                                 const CellMap& map,
                                 std::map<std::string, std::string> config = {});

/// Two-hidden-layer MSE regressor straight onto coordinates. Targets are
/// standardized internally; predictions are mapped back to meters.
struct RegressionModel {
  Network net;
  double mean_x = 0, mean_y = 0, std_x = 1, std_y = 1;
};

RegressionModel fit_deep_regression(const Matrix& inputs, const Matrix& coords,
                                    const TrainConfig& config,
                                    const Matrix* val_inputs = nullptr,
                                    const Matrix* val_coords = nullptr);

std::vector<Point2> predict_regression(const RegressionModel& model,
                                       const Matrix& inputs);

/// Deep Regression baseline over a normalized Wi-Fi corpus; evaluated on
/// the test split against the cell map of the training coordinates.
struct RegressionBaseline {
  RegressionModel model;
  MetricsReport report;
  std::vector<Point2> test_predictions;
};
RegressionBaseline deep_regression(const WifiCorpus& corpus,
                                   const TrainConfig& config, double tau,
                                   const CellMap& map);

/// Snaps every off-map regression prediction to the nearest occupied
/// centroid and recomputes the metrics; on-map predictions are unchanged.
MetricsReport regression_projection(const std::vector<Point2>& predictions,
                                    const std::vector<Point2>& truths,
                                    const CellMap& map,
                                    std::map<std::string, std::string> config = {});

/// Embedding + two-hidden-layer regressor pipeline (Isomap or LLE).
struct EmbeddingBaseline {
  EmbeddingModel embedding;
  RegressionModel regressor;
  MetricsReport report;
  std::vector<Point2> test_predictions;
};
EmbeddingBaseline embedding_regression(const WifiCorpus& corpus,
                                       EmbeddingMethod method, int k, int s,
                                       const TrainConfig& config,
                                       const CellMap& map,
                                       std::size_t landmark_cap = 1000);

}  // namespace noble
