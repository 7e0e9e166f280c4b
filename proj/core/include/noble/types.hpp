#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

namespace noble {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A point in the 2-D output space, meters.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Axis-aligned rectangle, half-open: [min_x, max_x) x [min_y, max_y).
struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }

  bool contains(const Point2& p) const {
    return p.x >= min_x && p.x < max_x && p.y >= min_y && p.y < max_y;
  }
};

}  // namespace noble
