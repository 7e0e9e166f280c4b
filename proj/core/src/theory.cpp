#include "noble/theory.hpp"

#include "noble/error.hpp"
#include "noble/io_util.hpp"

#include <json.hpp>

#include <cmath>
#include <random>
#include <vector>

namespace noble {

double mds_objective(const Matrix& embedding, const Matrix& inputs) {
  if (embedding.rows() != inputs.rows())
    throw DimensionMismatch("embedding and inputs disagree on point count");
  const Eigen::Index n = embedding.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dz = (embedding.row(i) - embedding.row(j)).norm();
      const double dx = (inputs.row(i) - inputs.row(j)).norm();
      total += (dz - dx) * (dz - dx);
    }
  }
  return total;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double rewrite_residual(const Vector& w, const Vector& z) {
  const double inner_form = sigmoid(w.dot(z));
  const double sq = (w - z).squaredNorm();
  const double distance_form = 1.0 / (1.0 + std::exp(0.5 * sq - 1.0));
  return std::abs(inner_form - distance_form);
}

}  // namespace

SigmoidRewriteResult sigmoid_rewrite_check(const Vector& w, const Vector& z) {
  if (w.size() != z.size())
    throw DimensionMismatch("vectors must share a dimension");
  if (std::abs(w.norm() - 1.0) > 1e-10 || std::abs(z.norm() - 1.0) > 1e-10)
    throw NotNormalized("sigmoid rewrite requires unit vectors");
  SigmoidRewriteResult result;
  result.residual = rewrite_residual(w, z);
  result.pass = result.residual < 1e-12;
  return result;
}

double sigmoid_rewrite_sweep(int pairs, int min_dim, int max_dim,
                             std::uint64_t seed) {
  if (pairs < 1 || min_dim < 1 || max_dim < min_dim)
    throw ConfigError("bad sweep parameters");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < pairs; ++t) {
    const int dim = min_dim + t % (max_dim - min_dim + 1);
    Vector w(dim), z(dim);
    for (int i = 0; i < dim; ++i) {
      w(i) = gauss(rng);
      z(i) = gauss(rng);
    }
    w.normalize();
    z.normalize();
    worst = std::max(worst, rewrite_residual(w, z));
  }
  return worst;
}

PropositionReport proposition_check(const Network& net, const Matrix& inputs,
                                    double lambda) {
  if (lambda <= 0.0) throw ConfigError("lambda must be positive");
  Network& mutable_net = const_cast<Network&>(net);
  mutable_net.set_mode(Network::Mode::inference);
  const ForwardResult out = mutable_net.forward(inputs);

  const Eigen::Index n = inputs.rows();
  const Eigen::Index classes = out.probs.cols();

  // Unit-normalize embeddings and class weight rows; the analysis lives on
  // the sphere.
  Matrix z = out.embedding;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = z.row(i).norm();
    if (norm > 0.0) z.row(i) /= norm;
  }
  Matrix w = net.last_linear_weight();
  for (Eigen::Index c = 0; c < w.rows(); ++c) {
    const double norm = w.row(c).norm();
    if (norm > 0.0) w.row(c) /= norm;
  }

  std::vector<int> predicted(static_cast<std::size_t>(n));
  std::vector<double> weight_gap(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double best_score = -1.0;
    for (Eigen::Index c = 0; c < classes; ++c) {
      if (out.probs(i, c) > best_score) {
        best_score = out.probs(i, c);
        best = static_cast<int>(c);
      }
    }
    predicted[static_cast<std::size_t>(i)] = best;
    weight_gap[static_cast<std::size_t>(i)] =
        (w.row(best) - z.row(i)).squaredNorm();
  }

  PropositionReport report;
  report.lambda = lambda;
  std::size_t within4 = 0, within2 = 0;
  double intra_sum = 0.0, inter_sum = 0.0;
  std::size_t intra_count = 0, inter_count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = (z.row(i) - z.row(j)).norm();
      const bool same =
          predicted[static_cast<std::size_t>(i)] ==
          predicted[static_cast<std::size_t>(j)];
      if (same) {
        intra_sum += dist;
        ++intra_count;
      } else {
        inter_sum += dist;
        ++inter_count;
      }
      if (!same) continue;
      if (weight_gap[static_cast<std::size_t>(i)] > lambda ||
          weight_gap[static_cast<std::size_t>(j)] > lambda)
        continue;
      ++report.qualifying_pairs;
      const double sq = dist * dist;
      if (sq <= 4.0 * lambda + 1e-12) ++within4;
      if (sq <= 2.0 * lambda + 1e-12) ++within2;
    }
  }
  if (report.qualifying_pairs == 0)
    throw NoQualifyingPairs("lambda admits no same-class pairs");
  report.frac_within_4lambda =
      static_cast<double>(within4) / static_cast<double>(report.qualifying_pairs);
  report.frac_within_2lambda =
      static_cast<double>(within2) / static_cast<double>(report.qualifying_pairs);
  report.mean_intra_class_distance =
      intra_count > 0 ? intra_sum / static_cast<double>(intra_count) : 0.0;
  report.mean_inter_class_distance =
      inter_count > 0 ? inter_sum / static_cast<double>(inter_count) : 0.0;
  return report;
}

std::string theory_report_json(double sweep_residual, int sweep_pairs,
                               const PropositionReport& proposition) {
  nlohmann::ordered_json j;
  j["sigmoid_rewrite"] = {{"max_residual", sweep_residual},
                          {"pairs", sweep_pairs},
                          {"pass", sweep_residual < 1e-12}};
  j["proposition"] = {
      {"lambda", proposition.lambda},
      {"qualifying_pairs", proposition.qualifying_pairs},
      {"frac_within_4lambda", proposition.frac_within_4lambda},
      {"frac_within_2lambda", proposition.frac_within_2lambda},
      {"mean_intra_class_distance", proposition.mean_intra_class_distance},
      {"mean_inter_class_distance", proposition.mean_inter_class_distance},
  };
  return j.dump(2) + "\n";
}

}  // namespace noble
