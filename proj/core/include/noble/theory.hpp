#pragma once

#include "noble/nn.hpp"
#include "noble/types.hpp"

#include <cstdint>
#include <string>

namespace noble {

/// Stress objective between an embedding Z and inputs X: the sum over i<j
/// of (|zi - zj| - |xi - xj|)^2. Invariant under rigid motion of Z.
double mds_objective(const Matrix& embedding, const Matrix& inputs);

struct SigmoidRewriteResult {
  bool pass = false;
  double residual = 0.0;
};

/// For unit vectors the inner-product sigmoid equals the distance form:
/// (1+e^{-w.z})^-1 = (1+e^{0.5|w-z|^2-1})^-1. Checks the identity to
/// 1e-12; throws NotNormalized when either vector is off the unit sphere
/// by more than 1e-10.
SigmoidRewriteResult sigmoid_rewrite_check(const Vector& w, const Vector& z);

/// Randomized sweep of the identity over `pairs` random unit vector pairs
/// with dimensions cycling through [min_dim, max_dim]. Returns the max
/// residual.
double sigmoid_rewrite_sweep(int pairs, int min_dim, int max_dim,
                             std::uint64_t seed);

struct PropositionReport {
  double lambda = 0.0;
  std::size_t qualifying_pairs = 0;
  /// Triangle-inequality bound |zi - zj|^2 <= 4*lambda; holds for every
  /// qualifying pair after normalization.
  double frac_within_4lambda = 0.0;
  /// The tighter 2*lambda variant, reported without assertion.
  double frac_within_2lambda = 0.0;
  double mean_intra_class_distance = 0.0;
  double mean_inter_class_distance = 0.0;
};

/// Extracts penultimate embeddings and last-layer class weights from a
/// trained classifier, unit-normalizes both, and measures embedding
/// closeness over same-predicted-class pairs whose class weight is within
/// sqrt(lambda). Throws NoQualifyingPairs when lambda admits none.
PropositionReport proposition_check(const Network& net, const Matrix& inputs,
                                    double lambda);

/// theory_report.json payload.
std::string theory_report_json(double sweep_residual, int sweep_pairs,
                               const PropositionReport& proposition);

}  // namespace noble
