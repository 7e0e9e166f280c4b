#include "noble/jacobi.hpp"

#include "noble/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace noble {

EigenDecomposition jacobi_eigen(const Matrix& symmetric, int max_sweeps,
                                double tol) {
  const Eigen::Index n = symmetric.rows();
  if (symmetric.cols() != n) throw NonSymmetric("matrix is not square");
  const double scale = std::max(symmetric.cwiseAbs().maxCoeff(), 1.0);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = r + 1; c < n; ++c)
      if (std::abs(symmetric(r, c) - symmetric(c, r)) > 1e-9 * scale)
        throw NonSymmetric("matrix is not symmetric");

  Matrix a = (symmetric + symmetric.transpose()) / 2.0;
  Matrix v = Matrix::Identity(n, n);

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * scale * static_cast<double>(n)) break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        // Stable tangent of the rotation angle.
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Eigen::Index i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return a(x, x) > a(y, y);
  });

  EigenDecomposition result;
  result.values.resize(n);
  result.vectors.resize(n, n);
  result.sweeps = sweep;
  for (Eigen::Index j = 0; j < n; ++j) {
    result.values(j) = a(order[static_cast<std::size_t>(j)],
                         order[static_cast<std::size_t>(j)]);
    result.vectors.col(j) = v.col(order[static_cast<std::size_t>(j)]);
    Eigen::Index argmax = 0;
    result.vectors.col(j).cwiseAbs().maxCoeff(&argmax);
    if (result.vectors(argmax, j) < 0.0) result.vectors.col(j) *= -1.0;
  }
  return result;
}

}  // namespace noble
