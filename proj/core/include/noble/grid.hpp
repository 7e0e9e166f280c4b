#pragma once

#include "noble/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace noble {

/// The quantization lattice: a fine grid of side `tau` and an optional
/// coarse grid of side `coarse_side`, both anchored at the same origin.
struct GridSpec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double tau = 1.0;
  std::optional<double> coarse_side;
  Rect bounds;

  /// Anchors the lattice to a point cloud: origin = min corner - tau/2,
  /// bounds padded by tau/2 on every side.
  static GridSpec fit(std::span<const Point2> points, double tau,
                      std::optional<double> coarse_side = std::nullopt);

  void validate() const;
};

/// Integer lattice coordinates of a (fine or coarse) cell.
struct CellIndex {
  std::int64_t ix = 0;
  std::int64_t iy = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend auto operator<=>(const CellIndex& a, const CellIndex& b) {
    if (a.ix != b.ix) return a.ix <=> b.ix;
    return a.iy <=> b.iy;
  }
};

/// Maps a point to its cell on a grid of the given side length. Cells are
/// half-open squares [low, high), so a point exactly on a gridline belongs
/// to the cell with the larger index.
CellIndex quantize(const GridSpec& spec, const Point2& point, double side);

/// Fine-grid overload.
CellIndex quantize(const GridSpec& spec, const Point2& point);

/// Center coordinates of a cell.
Point2 centroid(const GridSpec& spec, const CellIndex& cell, double side);

/// Per-sample class assignment produced by label_sample. Building and
/// floor are filled by model-level code, not by the grid.
struct QuantizedLabel {
  int fine_class = -1;
  std::optional<int> coarse_class;
  std::vector<int> extra_classes;  // occupied Moore neighbors, ascending IDs
  std::optional<int> building;
  std::optional<int> floor;
};

/// The set of occupied cells with dense class IDs. IDs are assigned in
/// lexicographic (ix, iy) order, so a permuted point list produces the
/// identical map. Immutable once built.
class CellMap {
 public:
  CellMap() = default;

  const GridSpec& spec() const { return spec_; }

  int k_fine() const { return static_cast<int>(fine_cells_.size()); }
  int k_coarse() const { return static_cast<int>(coarse_cells_.size()); }
  bool has_coarse() const { return spec_.coarse_side.has_value(); }

  std::optional<int> fine_class_of(const CellIndex& cell) const;
  std::optional<int> coarse_class_of(const CellIndex& cell) const;
  const CellIndex& fine_cell(int class_id) const;
  const CellIndex& coarse_cell(int class_id) const;
  std::int64_t fine_count(int class_id) const;
  std::int64_t coarse_count(int class_id) const;

  Point2 fine_centroid(int class_id) const;
  Point2 coarse_centroid(int class_id) const;

  /// True when the point is in bounds and its fine cell is occupied.
  bool occupied(const Point2& point) const;

  friend CellMap build_cell_map(const GridSpec& spec,
                                std::span<const Point2> points);
  friend CellMap parse_cell_map(const std::string& text);

 private:
  GridSpec spec_;
  std::map<CellIndex, int> fine_class_;
  std::map<CellIndex, int> coarse_class_;
  std::vector<CellIndex> fine_cells_;
  std::vector<CellIndex> coarse_cells_;
  std::vector<std::int64_t> fine_counts_;
  std::vector<std::int64_t> coarse_counts_;
};

/// Enumerates occupied cells of the point cloud. Throws EmptyDataset on an
/// empty list and OutOfBounds if any point falls outside spec.bounds.
CellMap build_cell_map(const GridSpec& spec, std::span<const Point2> points);

/// Class assignment for one point. Throws UnoccupiedCell when the point's
/// fine cell holds no training data. With adjacency on, extra_classes are
/// the occupied cells among the 8 lattice neighbors of the fine cell.
QuantizedLabel label_sample(const CellMap& map, const Point2& point,
                            bool adjacency);

/// Centroid of the occupied fine cell closest to the point (Euclidean);
/// ties break toward the smaller class ID.
Point2 nearest_occupied_centroid(const CellMap& map, const Point2& point);

/// Text serialization: header `tau coarse_side origin_x origin_y` (0 for a
/// missing coarse grid), then one `kind ix iy class_id count` line per
/// occupied cell, kind F or C. Bounds are not stored; parsing restores
/// them as the hull of the occupied fine cells.
std::string serialize_cell_map(const CellMap& map);
CellMap parse_cell_map(const std::string& text);

void save_cell_map(const CellMap& map, const std::string& path);
CellMap load_cell_map(const std::string& path);

}  // namespace noble
