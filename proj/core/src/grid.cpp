#include "noble/grid.hpp"

#include "noble/error.hpp"
#include "noble/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace noble {

GridSpec GridSpec::fit(std::span<const Point2> points, double tau,
                       std::optional<double> coarse_side) {
  if (points.empty()) throw EmptyDataset("cannot fit a grid to zero points");
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  for (const Point2& p : points) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  GridSpec spec;
  spec.tau = tau;
  spec.coarse_side = coarse_side;
  spec.origin_x = min_x - tau / 2.0;
  spec.origin_y = min_y - tau / 2.0;
  spec.bounds = Rect{spec.origin_x, spec.origin_y, max_x + tau / 2.0,
                     max_y + tau / 2.0};
  spec.validate();
  return spec;
}

void GridSpec::validate() const {
  if (!(tau > 0.0)) throw Error("tau must be positive");
  if (coarse_side && !(*coarse_side > tau))
    throw Error("coarse_side must exceed tau");
  if (!(bounds.width() > 0.0) || !(bounds.height() > 0.0))
    throw Error("bounds must have positive extent");
}

CellIndex quantize(const GridSpec& spec, const Point2& point, double side) {
  if (!spec.bounds.contains(point)) {
    throw OutOfBounds("point (" + format_double(point.x) + ", " +
                      format_double(point.y) + ") outside grid bounds");
  }
  return CellIndex{
      static_cast<std::int64_t>(std::floor((point.x - spec.origin_x) / side)),
      static_cast<std::int64_t>(std::floor((point.y - spec.origin_y) / side))};
}

CellIndex quantize(const GridSpec& spec, const Point2& point) {
  return quantize(spec, point, spec.tau);
}

Point2 centroid(const GridSpec& spec, const CellIndex& cell, double side) {
  return Point2{spec.origin_x + (static_cast<double>(cell.ix) + 0.5) * side,
                spec.origin_y + (static_cast<double>(cell.iy) + 0.5) * side};
}

CellMap build_cell_map(const GridSpec& spec, std::span<const Point2> points) {
  spec.validate();
  if (points.empty()) throw EmptyDataset("no points to build a cell map from");

  std::map<CellIndex, std::int64_t> fine, coarse;
  for (const Point2& p : points) {
    ++fine[quantize(spec, p, spec.tau)];
    if (spec.coarse_side) ++coarse[quantize(spec, p, *spec.coarse_side)];
  }

  CellMap map;
  map.spec_ = spec;
  map.fine_cells_.reserve(fine.size());
  for (const auto& [cell, count] : fine) {
    map.fine_class_.emplace(cell, static_cast<int>(map.fine_cells_.size()));
    map.fine_cells_.push_back(cell);
    map.fine_counts_.push_back(count);
  }
  for (const auto& [cell, count] : coarse) {
    map.coarse_class_.emplace(cell, static_cast<int>(map.coarse_cells_.size()));
    map.coarse_cells_.push_back(cell);
    map.coarse_counts_.push_back(count);
  }
  return map;
}

std::optional<int> CellMap::fine_class_of(const CellIndex& cell) const {
  auto it = fine_class_.find(cell);
  if (it == fine_class_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> CellMap::coarse_class_of(const CellIndex& cell) const {
  auto it = coarse_class_.find(cell);
  if (it == coarse_class_.end()) return std::nullopt;
  return it->second;
}

const CellIndex& CellMap::fine_cell(int class_id) const {
  return fine_cells_.at(static_cast<std::size_t>(class_id));
}

const CellIndex& CellMap::coarse_cell(int class_id) const {
  return coarse_cells_.at(static_cast<std::size_t>(class_id));
}

std::int64_t CellMap::fine_count(int class_id) const {
  return fine_counts_.at(static_cast<std::size_t>(class_id));
}

std::int64_t CellMap::coarse_count(int class_id) const {
  return coarse_counts_.at(static_cast<std::size_t>(class_id));
}

Point2 CellMap::fine_centroid(int class_id) const {
  return centroid(spec_, fine_cell(class_id), spec_.tau);
}

Point2 CellMap::coarse_centroid(int class_id) const {
  return centroid(spec_, coarse_cell(class_id), *spec_.coarse_side);
}

bool CellMap::occupied(const Point2& point) const {
  if (!spec_.bounds.contains(point)) return false;
  return fine_class_.count(quantize(spec_, point)) > 0;
}

QuantizedLabel label_sample(const CellMap& map, const Point2& point,
                            bool adjacency) {
  const CellIndex cell = quantize(map.spec(), point);
  const auto fine = map.fine_class_of(cell);
  if (!fine) {
    throw UnoccupiedCell("point (" + format_double(point.x) + ", " +
                         format_double(point.y) +
                         ") maps to a cell with no training data");
  }
  QuantizedLabel label;
  label.fine_class = *fine;
  if (map.has_coarse()) {
    const CellIndex coarse =
        quantize(map.spec(), point, *map.spec().coarse_side);
    label.coarse_class = map.coarse_class_of(coarse);
  }
  if (adjacency) {
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        if (auto id = map.fine_class_of(CellIndex{cell.ix + dx, cell.iy + dy}))
          label.extra_classes.push_back(*id);
      }
    }
    std::sort(label.extra_classes.begin(), label.extra_classes.end());
  }
  return label;
}

Point2 nearest_occupied_centroid(const CellMap& map, const Point2& point) {
  if (map.k_fine() == 0) throw EmptyDataset("empty cell map");
  Point2 best{};
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int id = 0; id < map.k_fine(); ++id) {
    const Point2 c = map.fine_centroid(id);
    const double dx = c.x - point.x;
    const double dy = c.y - point.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {  // strict: the lowest class ID keeps a tie
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

std::string serialize_cell_map(const CellMap& map) {
  std::ostringstream out;
  const GridSpec& spec = map.spec();
  out << format_double(spec.tau) << ' '
      << format_double(spec.coarse_side.value_or(0.0)) << ' '
      << format_double(spec.origin_x) << ' ' << format_double(spec.origin_y)
      << '\n';
  for (int id = 0; id < map.k_fine(); ++id) {
    const CellIndex& c = map.fine_cell(id);
    out << "F " << c.ix << ' ' << c.iy << ' ' << id << ' '
        << map.fine_count(id) << '\n';
  }
  for (int id = 0; id < map.k_coarse(); ++id) {
    const CellIndex& c = map.coarse_cell(id);
    out << "C " << c.ix << ' ' << c.iy << ' ' << id << ' '
        << map.coarse_count(id) << '\n';
  }
  return out.str();
}

CellMap parse_cell_map(const std::string& text) {
  std::istringstream in(text);
  CellMap map;
  double coarse = 0.0;
  if (!(in >> map.spec_.tau >> coarse >> map.spec_.origin_x >>
        map.spec_.origin_y)) {
    throw FormatError("malformed cell map header", 1, 1);
  }
  if (coarse > 0.0) map.spec_.coarse_side = coarse;

  std::string kind;
  std::size_t line = 1;
  while (in >> kind) {
    ++line;
    CellIndex cell;
    int id = 0;
    std::int64_t count = 0;
    if (!(in >> cell.ix >> cell.iy >> id >> count))
      throw FormatError("malformed cell map line", line, 1);
    if (kind == "F") {
      if (id != static_cast<int>(map.fine_cells_.size()))
        throw FormatError("fine class IDs must be dense and ordered", line, 4);
      map.fine_class_.emplace(cell, id);
      map.fine_cells_.push_back(cell);
      map.fine_counts_.push_back(count);
    } else if (kind == "C") {
      if (id != static_cast<int>(map.coarse_cells_.size()))
        throw FormatError("coarse class IDs must be dense and ordered", line, 4);
      map.coarse_class_.emplace(cell, id);
      map.coarse_cells_.push_back(cell);
      map.coarse_counts_.push_back(count);
    } else {
      throw FormatError("unknown cell kind '" + kind + "'", line, 1);
    }
  }
  if (map.fine_cells_.empty()) throw EmptyDataset("cell map has no fine cells");

  // Bounds were not stored: restore the hull of the occupied fine cells.
  const double tau = map.spec_.tau;
  std::int64_t min_ix = map.fine_cells_.front().ix, max_ix = min_ix;
  std::int64_t min_iy = map.fine_cells_.front().iy, max_iy = min_iy;
  for (const CellIndex& c : map.fine_cells_) {
    min_ix = std::min(min_ix, c.ix);
    max_ix = std::max(max_ix, c.ix);
    min_iy = std::min(min_iy, c.iy);
    max_iy = std::max(max_iy, c.iy);
  }
  map.spec_.bounds =
      Rect{map.spec_.origin_x + static_cast<double>(min_ix) * tau,
           map.spec_.origin_y + static_cast<double>(min_iy) * tau,
           map.spec_.origin_x + static_cast<double>(max_ix + 1) * tau,
           map.spec_.origin_y + static_cast<double>(max_iy + 1) * tau};
  return map;
}

void save_cell_map(const CellMap& map, const std::string& path) {
  atomic_write_file(path, serialize_cell_map(map));
}

CellMap load_cell_map(const std::string& path) {
  return parse_cell_map(read_file(path));
}

}  // namespace noble
