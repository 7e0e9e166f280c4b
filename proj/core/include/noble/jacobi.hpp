#pragma once

#include "noble/types.hpp"

namespace noble {

struct EigenDecomposition {
  Vector values;   // descending
  Matrix vectors;  // matching columns, orthonormal
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvectors get
/// a canonical sign (largest-magnitude component positive) so results are
/// reproducible. Throws NonSymmetric when the input is not symmetric.
EigenDecomposition jacobi_eigen(const Matrix& symmetric, int max_sweeps = 100,
                                double tol = 1e-14);

}  // namespace noble
