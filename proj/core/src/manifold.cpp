#include "noble/manifold.hpp"

#include "noble/error.hpp"
#include "noble/io_util.hpp"
#include "noble/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace noble {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Collapses exactly-equal rows; first occurrence is the representative.
void collapse_duplicates(const Matrix& points, NeighborGraph& graph) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::unordered_map<std::string, std::size_t> seen;
  graph.node_of_point.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string key(reinterpret_cast<const char*>(points.row(
                        static_cast<Eigen::Index>(i)).eval().data()),
                    static_cast<std::size_t>(points.cols()) * sizeof(double));
    auto [it, inserted] = seen.emplace(std::move(key), graph.point_of_node.size());
    if (inserted) graph.point_of_node.push_back(i);
    graph.node_of_point[i] = it->second;
  }
  graph.node_count = graph.point_of_node.size();
  graph.had_duplicates = graph.node_count < n;
  if (graph.had_duplicates) {
    std::cerr << "knn_graph: collapsed " << n - graph.node_count
              << " duplicate points\n";
  }
}

}  // namespace

NeighborGraph knn_graph(const Matrix& points, int k) {
  if (k < 1) throw DegenerateInput("k must be >= 1");
  if (points.rows() < 2) throw DegenerateInput("need at least 2 points");

  NeighborGraph graph;
  collapse_duplicates(points, graph);
  const std::size_t m = graph.node_count;
  if (m <= static_cast<std::size_t>(k))
    throw DegenerateInput("need more than k unique points (" +
                          std::to_string(m) + " <= " + std::to_string(k) + ")");

  Matrix unique(static_cast<Eigen::Index>(m), points.cols());
  for (std::size_t node = 0; node < m; ++node)
    unique.row(static_cast<Eigen::Index>(node)) =
        points.row(static_cast<Eigen::Index>(graph.point_of_node[node]));

  graph.knn.assign(m, {});
  std::vector<std::vector<double>> knn_dist(m);
  parallel_for(m, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(m - 1);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double d = (unique.row(static_cast<Eigen::Index>(i)) -
                        unique.row(static_cast<Eigen::Index>(j)))
                           .norm();
      dist.emplace_back(d, j);
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    graph.knn[i].reserve(static_cast<std::size_t>(k));
    knn_dist[i].reserve(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) {
      graph.knn[i].push_back(dist[static_cast<std::size_t>(t)].second);
      knn_dist[i].push_back(dist[static_cast<std::size_t>(t)].first);
    }
  });

  // Symmetrize by edge union.
  std::vector<std::set<std::size_t>> adjacency(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < graph.knn[i].size(); ++t) {
      adjacency[i].insert(graph.knn[i][t]);
      adjacency[graph.knn[i][t]].insert(i);
    }
  }
  graph.edges.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    graph.edges[i].reserve(adjacency[i].size());
    for (std::size_t j : adjacency[i]) {
      const double d = (unique.row(static_cast<Eigen::Index>(i)) -
                        unique.row(static_cast<Eigen::Index>(j)))
                           .norm();
      graph.edges[i].emplace_back(j, d);
    }
  }
  return graph;
}

namespace {

std::vector<std::size_t> component_sizes(const NeighborGraph& graph) {
  std::vector<int> component(graph.node_count, -1);
  std::vector<std::size_t> sizes;
  for (std::size_t start = 0; start < graph.node_count; ++start) {
    if (component[start] >= 0) continue;
    const int id = static_cast<int>(sizes.size());
    std::size_t size = 0;
    std::vector<std::size_t> stack{start};
    component[start] = id;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      ++size;
      for (const auto& [next, w] : graph.edges[node]) {
        if (component[next] < 0) {
          component[next] = id;
          stack.push_back(next);
        }
      }
    }
    sizes.push_back(size);
  }
  return sizes;
}

void require_connected(const NeighborGraph& graph) {
  const std::vector<std::size_t> sizes = component_sizes(graph);
  if (sizes.size() <= 1) return;
  std::ostringstream msg;
  msg << "graph has " << sizes.size() << " components of sizes";
  for (std::size_t s : sizes) msg << ' ' << s;
  throw DisconnectedGraph(msg.str());
}

std::vector<double> dijkstra(const NeighborGraph& graph, std::size_t source) {
  std::vector<double> dist(graph.node_count, kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, node] = queue.top();
    queue.pop();
    if (d > dist[node]) continue;
    for (const auto& [next, w] : graph.edges[node]) {
      const double candidate = d + w;
      if (candidate < dist[next]) {
        dist[next] = candidate;
        queue.emplace(candidate, next);
      }
    }
  }
  return dist;
}

}  // namespace

Matrix geodesic_distances(const NeighborGraph& graph) {
  require_connected(graph);
  const std::size_t m = graph.node_count;
  Matrix distances(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  parallel_for(m, [&](std::size_t i) {
    const std::vector<double> row = dijkstra(graph, i);
    for (std::size_t j = 0; j < m; ++j)
      distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          row[j];
  });
  return distances;
}

namespace {

struct MdsDecomposition {
  Matrix eigenvectors;  // n x s
  Vector eigenvalues;   // s, negatives truncated to zero
  Vector mean_sq_dist;  // n, column means of squared distances
  bool truncated = false;
};

void validate_distance_matrix(const Matrix& distances) {
  const Eigen::Index n = distances.rows();
  if (distances.cols() != n) throw NonSymmetric("distance matrix not square");
  const double scale = std::max(distances.cwiseAbs().maxCoeff(), 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(distances(i, i)) > 1e-12 * scale)
      throw NonSymmetric("distance matrix diagonal must be zero");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (distances(i, j) < 0.0)
        throw NegativeEntries("distance matrix has negative entries");
      if (std::abs(distances(i, j) - distances(j, i)) > 1e-9 * scale)
        throw NonSymmetric("distance matrix not symmetric");
    }
  }
}

MdsDecomposition mds_decompose(const Matrix& distances, int s) {
  validate_distance_matrix(distances);
  const Eigen::Index n = distances.rows();
  if (s < 1) throw ConfigError("embedding dimension must be >= 1");
  if (s >= n) throw ConfigError("embedding dimension must be below n");

  const Matrix squared = distances.array().square().matrix();
  const Vector row_mean = squared.rowwise().mean();
  const double total_mean = squared.mean();
  Matrix gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      gram(i, j) =
          -0.5 * (squared(i, j) - row_mean(i) - row_mean(j) + total_mean);

  const EigenDecomposition eig = jacobi_eigen(gram);
  MdsDecomposition result;
  result.eigenvectors = eig.vectors.leftCols(s);
  result.eigenvalues.resize(s);
  for (int j = 0; j < s; ++j) {
    const double lambda = eig.values(j);
    if (lambda < 0.0) {
      result.eigenvalues(j) = 0.0;
      result.truncated = true;
    } else {
      result.eigenvalues(j) = lambda;
    }
  }
  if (result.truncated)
    std::cerr << "classical_mds: negative eigenvalues truncated to zero "
                 "(non-Euclidean distances)\n";
  result.mean_sq_dist = squared.colwise().mean().transpose();
  return result;
}

}  // namespace

Matrix classical_mds(const Matrix& distances, int s) {
  const MdsDecomposition mds = mds_decompose(distances, s);
  Matrix embedding(distances.rows(), s);
  for (int j = 0; j < s; ++j)
    embedding.col(j) =
        mds.eigenvectors.col(j) * std::sqrt(mds.eigenvalues(j));
  return embedding;
}

// ---------------------------------------------------------------------------
// Isomap

namespace {

std::vector<std::size_t> pick_landmarks(std::size_t node_count,
                                        std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> all(node_count);
  std::iota(all.begin(), all.end(), 0);
  if (node_count <= cap) return all;
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(cap);
  std::sort(all.begin(), all.end());
  return all;
}

/// Landmark kernel interpolation: squared distances to the landmarks in,
/// embedding coordinates out.
Vector landmark_embed(const EmbeddingModel& model, const Vector& sq_dist) {
  Vector z = Vector::Zero(model.s);
  const Vector delta = model.landmark_mean_sq_dist - sq_dist;
  for (int j = 0; j < model.s; ++j) {
    const double lambda = model.landmark_eigenvalues(j);
    if (lambda <= 0.0) continue;
    z(j) = model.landmark_eigenvectors.col(j).dot(delta) /
           (2.0 * std::sqrt(lambda));
  }
  return z;
}

Matrix unique_rows(const Matrix& points,
                   const std::vector<std::size_t>& point_of_node) {
  Matrix unique(static_cast<Eigen::Index>(point_of_node.size()), points.cols());
  for (std::size_t node = 0; node < point_of_node.size(); ++node)
    unique.row(static_cast<Eigen::Index>(node)) =
        points.row(static_cast<Eigen::Index>(point_of_node[node]));
  return unique;
}

}  // namespace

EmbeddingModel isomap_fit(const Matrix& points, int k, int s,
                          std::size_t landmark_cap, std::uint64_t seed) {
  NeighborGraph graph = knn_graph(points, k);
  require_connected(graph);

  EmbeddingModel model;
  model.method = EmbeddingMethod::isomap;
  model.k = k;
  model.s = s;
  model.basis_points = unique_rows(points, graph.point_of_node);

  const std::vector<std::size_t> landmarks =
      pick_landmarks(graph.node_count, landmark_cap, seed);
  const auto m = static_cast<Eigen::Index>(landmarks.size());
  if (s >= m) throw ConfigError("embedding dimension must be below the landmark count");

  model.landmark_geodesics.resize(m, static_cast<Eigen::Index>(graph.node_count));
  parallel_for(landmarks.size(), [&](std::size_t a) {
    const std::vector<double> row = dijkstra(graph, landmarks[a]);
    for (std::size_t j = 0; j < graph.node_count; ++j)
      model.landmark_geodesics(static_cast<Eigen::Index>(a),
                               static_cast<Eigen::Index>(j)) = row[j];
  });

  Matrix landmark_d(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b)
      landmark_d(a, b) = model.landmark_geodesics(
          a, static_cast<Eigen::Index>(landmarks[static_cast<std::size_t>(b)]));
  // Dijkstra is exact so the landmark block is symmetric up to rounding;
  // make it exactly so before the decomposition.
  landmark_d = ((landmark_d + landmark_d.transpose()) / 2.0).eval();

  const MdsDecomposition mds = mds_decompose(landmark_d, s);
  model.landmark_eigenvectors = mds.eigenvectors;
  model.landmark_eigenvalues = mds.eigenvalues;
  model.landmark_mean_sq_dist = mds.mean_sq_dist;

  Matrix landmark_embedding(m, s);
  for (int j = 0; j < s; ++j)
    landmark_embedding.col(j) =
        mds.eigenvectors.col(j) * std::sqrt(mds.eigenvalues(j));

  // Every node: landmarks take their MDS row, the rest go through the
  // kernel formula on their landmark geodesics.
  Matrix node_embedding(static_cast<Eigen::Index>(graph.node_count), s);
  std::vector<Eigen::Index> landmark_rank(graph.node_count,
                                          static_cast<Eigen::Index>(-1));
  for (Eigen::Index a = 0; a < m; ++a)
    landmark_rank[landmarks[static_cast<std::size_t>(a)]] = a;
  for (std::size_t node = 0; node < graph.node_count; ++node) {
    const Eigen::Index rank = landmark_rank[node];
    if (rank >= 0) {
      node_embedding.row(static_cast<Eigen::Index>(node)) =
          landmark_embedding.row(rank);
    } else {
      const Vector sq = model.landmark_geodesics.col(static_cast<Eigen::Index>(node))
                            .array()
                            .square()
                            .matrix();
      node_embedding.row(static_cast<Eigen::Index>(node)) =
          landmark_embed(model, sq).transpose();
    }
  }

  model.basis_embedding = node_embedding;
  model.embedding.resize(points.rows(), s);
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    model.embedding.row(i) = node_embedding.row(
        static_cast<Eigen::Index>(graph.node_of_point[static_cast<std::size_t>(i)]));
  return model;
}

// ---------------------------------------------------------------------------
// LLE

Vector lle_weights(const Matrix& neighbors, const Vector& row, int s) {
  const Eigen::Index k = neighbors.rows();
  Matrix diff = neighbors;
  diff.rowwise() -= row.transpose();
  Matrix gram = diff * diff.transpose();
  if (k > s) {
    const double reg = 1e-3 * gram.trace();
    gram.diagonal().array() += reg;
  }
  Eigen::LDLT<Matrix> solver(gram);
  Vector w = solver.solve(Vector::Ones(k));
  if (solver.info() != Eigen::Success || !w.allFinite())
    throw SingularLocalGram("local Gram system is singular");
  const double sum = w.sum();
  if (std::abs(sum) < 1e-12)
    throw SingularLocalGram("reconstruction weights sum to zero");
  return w / sum;
}

EmbeddingModel lle_fit(const Matrix& points, int k, int s,
                       std::size_t landmark_cap, std::uint64_t seed) {
  NeighborGraph graph = knn_graph(points, k);
  const Matrix unique = unique_rows(points, graph.point_of_node);

  // Above the cap the eigenproblem runs on a seeded sample and the
  // remaining points are embedded as out-of-sample queries.
  const std::vector<std::size_t> sample =
      pick_landmarks(graph.node_count, landmark_cap, seed);
  const auto m = static_cast<Eigen::Index>(sample.size());
  if (s + 1 >= m) throw ConfigError("embedding dimension too large for LLE");

  Matrix sample_points(m, points.cols());
  for (Eigen::Index a = 0; a < m; ++a)
    sample_points.row(a) =
        unique.row(static_cast<Eigen::Index>(sample[static_cast<std::size_t>(a)]));

  // kNN inside the sample.
  NeighborGraph sample_graph = knn_graph(sample_points, k);
  if (sample_graph.node_count != static_cast<std::size_t>(m))
    throw DegenerateInput("sampled LLE points are not unique");

  Matrix w = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& neighbor_ids = sample_graph.knn[static_cast<std::size_t>(i)];
    Matrix neighbors(static_cast<Eigen::Index>(neighbor_ids.size()),
                     points.cols());
    for (std::size_t t = 0; t < neighbor_ids.size(); ++t)
      neighbors.row(static_cast<Eigen::Index>(t)) =
          sample_points.row(static_cast<Eigen::Index>(neighbor_ids[t]));
    const Vector weights =
        lle_weights(neighbors, sample_points.row(i).transpose(), s);
    for (std::size_t t = 0; t < neighbor_ids.size(); ++t)
      w(i, static_cast<Eigen::Index>(neighbor_ids[t])) = weights(
          static_cast<Eigen::Index>(t));
  }

  const Matrix iw = Matrix::Identity(m, m) - w;
  const Matrix cost = iw.transpose() * iw;
  const EigenDecomposition eig = jacobi_eigen(cost);

  EmbeddingModel model;
  model.method = EmbeddingMethod::lle;
  model.k = k;
  model.s = s;
  model.basis_points = sample_points;
  model.basis_embedding.resize(m, s);
  // Bottom eigenvectors, discarding the constant one with the smallest
  // eigenvalue.
  for (int j = 0; j < s; ++j)
    model.basis_embedding.col(j) = eig.vectors.col(m - 2 - j);

  Matrix node_embedding(static_cast<Eigen::Index>(graph.node_count), s);
  std::vector<bool> in_sample(graph.node_count, false);
  for (Eigen::Index a = 0; a < m; ++a) {
    in_sample[sample[static_cast<std::size_t>(a)]] = true;
    node_embedding.row(static_cast<Eigen::Index>(sample[static_cast<std::size_t>(a)])) =
        model.basis_embedding.row(a);
  }
  for (std::size_t node = 0; node < graph.node_count; ++node) {
    if (in_sample[node]) continue;
    node_embedding.row(static_cast<Eigen::Index>(node)) =
        embed_out_of_sample(model,
                            unique.row(static_cast<Eigen::Index>(node)))
            .row(0);
  }

  model.embedding.resize(points.rows(), s);
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    model.embedding.row(i) = node_embedding.row(
        static_cast<Eigen::Index>(graph.node_of_point[static_cast<std::size_t>(i)]));
  return model;
}

// ---------------------------------------------------------------------------
// Out-of-sample mapping

namespace {

std::vector<std::size_t> nearest_basis_rows(const Matrix& basis,
                                            const Vector& query, int k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(static_cast<std::size_t>(basis.rows()));
  for (Eigen::Index j = 0; j < basis.rows(); ++j)
    dist.emplace_back((basis.row(j).transpose() - query).norm(),
                      static_cast<std::size_t>(j));
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k),
                                          dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take),
                    dist.end());
  std::vector<std::size_t> ids(take);
  for (std::size_t t = 0; t < take; ++t) ids[t] = dist[t].second;
  return ids;
}

}  // namespace

Matrix embed_out_of_sample(const EmbeddingModel& model, const Matrix& queries) {
  if (queries.cols() != model.basis_points.cols())
    throw DimensionMismatch("query dimension does not match the embedding");
  Matrix out(queries.rows(), model.s);
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const Vector query = queries.row(q).transpose();
    const std::vector<std::size_t> near =
        nearest_basis_rows(model.basis_points, query, model.k);
    if (model.method == EmbeddingMethod::isomap) {
      // Graph distance through the nearest training points, then the
      // landmark kernel.
      const auto landmarks = model.landmark_geodesics.rows();
      Vector sq(landmarks);
      for (Eigen::Index a = 0; a < landmarks; ++a) {
        double best = kInf;
        for (std::size_t j : near) {
          const double through =
              (model.basis_points.row(static_cast<Eigen::Index>(j)).transpose() -
               query)
                  .norm() +
              model.landmark_geodesics(a, static_cast<Eigen::Index>(j));
          best = std::min(best, through);
        }
        sq(a) = best * best;
      }
      out.row(q) = landmark_embed(model, sq).transpose();
    } else {
      Matrix neighbors(static_cast<Eigen::Index>(near.size()), queries.cols());
      for (std::size_t t = 0; t < near.size(); ++t)
        neighbors.row(static_cast<Eigen::Index>(t)) =
            model.basis_points.row(static_cast<Eigen::Index>(near[t]));
      const Vector weights = lle_weights(neighbors, query, model.s);
      Vector z = Vector::Zero(model.s);
      for (std::size_t t = 0; t < near.size(); ++t)
        z += weights(static_cast<Eigen::Index>(t)) *
             model.basis_embedding.row(static_cast<Eigen::Index>(near[t]))
                 .transpose();
      out.row(q) = z.transpose();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Comparison models

MetricsReport evaluate_positions(const std::vector<Point2>& predictions,
                                 const std::vector<Point2>& truths,
                                 const CellMap& map,
                                 std::map<std::string, std::string> config) {
  if (predictions.size() != truths.size())
    throw EmptyEvaluation("prediction/truth count mismatch");
  std::vector<double> errors(predictions.size());
  std::vector<bool> off_map(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    errors[i] = position_error(predictions[i], truths[i]);
    off_map[i] = !map.occupied(predictions[i]);
  }
  return summarize(errors, {}, off_map, std::move(config));
}

RegressionModel fit_deep_regression(const Matrix& inputs, const Matrix& coords,
                                    const TrainConfig& config,
                                    const Matrix* val_inputs,
                                    const Matrix* val_coords) {
  if (coords.cols() != 2)
    throw DimensionMismatch("regression expects 2-D targets");
  RegressionModel model;
  model.mean_x = coords.col(0).mean();
  model.mean_y = coords.col(1).mean();
  model.std_x = std::max(std::sqrt((coords.col(0).array() - model.mean_x)
                                       .square()
                                       .mean()),
                         1e-9);
  model.std_y = std::max(std::sqrt((coords.col(1).array() - model.mean_y)
                                       .square()
                                       .mean()),
                         1e-9);

  auto standardize = [&](const Matrix& c) {
    Matrix out(c.rows(), 2);
    out.col(0) = (c.col(0).array() - model.mean_x) / model.std_x;
    out.col(1) = (c.col(1).array() - model.mean_y) / model.std_y;
    return out;
  };

  const std::vector<int> hidden{128, 128};
  model.net = Network::mlp(static_cast<int>(inputs.cols()), hidden, 2,
                           config.seed);
  const Matrix targets = standardize(coords);
  if (val_inputs != nullptr && val_coords != nullptr) {
    const Matrix val_targets = standardize(*val_coords);
    train(model.net, inputs, targets, LossKind::mse, config, val_inputs,
          &val_targets);
  } else {
    train(model.net, inputs, targets, LossKind::mse, config);
  }
  return model;
}

std::vector<Point2> predict_regression(const RegressionModel& model,
                                       const Matrix& inputs) {
  RegressionModel& mutable_model = const_cast<RegressionModel&>(model);
  mutable_model.net.set_mode(Network::Mode::inference);
  const ForwardResult out = mutable_model.net.forward(inputs);
  std::vector<Point2> predictions(static_cast<std::size_t>(inputs.rows()));
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    predictions[static_cast<std::size_t>(i)] =
        Point2{out.logits(i, 0) * model.std_x + model.mean_x,
               out.logits(i, 1) * model.std_y + model.mean_y};
  }
  return predictions;
}

RegressionBaseline deep_regression(const WifiCorpus& corpus,
                                   const TrainConfig& config, double tau,
                                   const CellMap& map) {
  if (!corpus.normalization)
    throw ConfigError("baselines expect a normalized corpus");
  const Matrix train_x = rssi_matrix(corpus.train);
  const Matrix train_y = coord_matrix(corpus.train);
  const Matrix test_x = rssi_matrix(corpus.test);
  const Matrix test_y = coord_matrix(corpus.test);

  RegressionBaseline baseline;
  baseline.model =
      fit_deep_regression(train_x, train_y, config, &test_x, &test_y);
  baseline.test_predictions = predict_regression(baseline.model, test_x);

  std::map<std::string, std::string> echo;
  echo["model"] = "deep-regression";
  echo["tau"] = format_double(tau);
  echo["seed"] = std::to_string(config.seed);
  baseline.report = evaluate_positions(
      baseline.test_predictions, positions_of(corpus.test), map, std::move(echo));
  return baseline;
}

MetricsReport regression_projection(const std::vector<Point2>& predictions,
                                    const std::vector<Point2>& truths,
                                    const CellMap& map,
                                    std::map<std::string, std::string> config) {
  std::vector<Point2> projected = predictions;
  for (Point2& p : projected) {
    if (!map.occupied(p)) p = nearest_occupied_centroid(map, p);
  }
  config["model"] = "regression-projection";
  return evaluate_positions(projected, truths, map, std::move(config));
}

EmbeddingBaseline embedding_regression(const WifiCorpus& corpus,
                                       EmbeddingMethod method, int k, int s,
                                       const TrainConfig& config,
                                       const CellMap& map,
                                       std::size_t landmark_cap) {
  if (!corpus.normalization)
    throw ConfigError("baselines expect a normalized corpus");
  const Matrix train_x = rssi_matrix(corpus.train);
  const Matrix train_y = coord_matrix(corpus.train);
  const Matrix test_x = rssi_matrix(corpus.test);
  const Matrix test_y = coord_matrix(corpus.test);

  EmbeddingBaseline baseline;
  baseline.embedding = method == EmbeddingMethod::isomap
                           ? isomap_fit(train_x, k, s, landmark_cap, config.seed)
                           : lle_fit(train_x, k, s, landmark_cap, config.seed);

  const Matrix test_embedded = embed_out_of_sample(baseline.embedding, test_x);
  baseline.regressor = fit_deep_regression(baseline.embedding.embedding,
                                           train_y, config, &test_embedded,
                                           &test_y);
  baseline.test_predictions =
      predict_regression(baseline.regressor, test_embedded);

  std::map<std::string, std::string> echo;
  echo["model"] = method == EmbeddingMethod::isomap ? "isomap-regression"
                                                    : "lle-regression";
  echo["k"] = std::to_string(k);
  echo["s"] = std::to_string(s);
  echo["seed"] = std::to_string(config.seed);
  baseline.report = evaluate_positions(
      baseline.test_predictions, positions_of(corpus.test), map, std::move(echo));
  return baseline;
}

}  // namespace noble
