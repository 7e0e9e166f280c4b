#include <doctest.h>

#include "noble/error.hpp"
#include "noble/grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace noble;

namespace {

GridSpec spec_at_origin(double tau, double extent,
                        std::optional<double> coarse = std::nullopt) {
  GridSpec spec;
  spec.origin_x = 0.0;
  spec.origin_y = 0.0;
  spec.tau = tau;
  spec.coarse_side = coarse;
  spec.bounds = Rect{0.0, 0.0, extent, extent};
  return spec;
}

/// Exhaustive scan with the same tie rule, written independently of
/// nearest_occupied_centroid.
Point2 brute_force_nearest(const CellMap& map, const Point2& p) {
  int best_id = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int id = 0; id < map.k_fine(); ++id) {
    const Point2 c = map.fine_centroid(id);
    const double d = std::hypot(c.x - p.x, c.y - p.y);
    if (d < best) {
      best = d;
      best_id = id;
    }
  }
  return map.fine_centroid(best_id);
}

}  // namespace

TEST_CASE("quantize floor arithmetic") {
  const GridSpec spec = spec_at_origin(1.0, 10.0);
  CHECK(quantize(spec, {2.3, 4.7}) == CellIndex{2, 4});
}

TEST_CASE("quantize half-open boundary rule") {
  const GridSpec spec = spec_at_origin(1.0, 10.0);
  CHECK(quantize(spec, {3.0, 4.0}) == CellIndex{3, 4});
}

TEST_CASE("quantize with shifted origin") {
  GridSpec spec;
  spec.origin_x = -1.0;
  spec.origin_y = -1.0;
  spec.tau = 0.5;
  spec.bounds = Rect{-1.0, -1.0, 5.0, 5.0};
  CHECK(quantize(spec, {0.0, 0.0}) == CellIndex{2, 2});
}

TEST_CASE("quantize rejects out-of-bounds points") {
  const GridSpec spec = spec_at_origin(1.0, 10.0);
  CHECK_THROWS_AS(quantize(spec, {10.0, 5.0}), OutOfBounds);
  CHECK_THROWS_AS(quantize(spec, {-0.1, 5.0}), OutOfBounds);
}

TEST_CASE("centroid formula") {
  const GridSpec spec = spec_at_origin(1.0, 10.0);
  const Point2 c = centroid(spec, {2, 4}, 1.0);
  CHECK(c.x == doctest::Approx(2.5));
  CHECK(c.y == doctest::Approx(4.5));

  const Point2 small = centroid(spec, {0, 0}, 0.4);
  CHECK(small.x == doctest::Approx(0.2));
  CHECK(small.y == doctest::Approx(0.2));
}

TEST_CASE("quantize/centroid roundtrip stays within half a cell") {
  const double tau = 0.7;
  const GridSpec spec = spec_at_origin(tau, 20.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(0.0, 20.0);
  for (int i = 0; i < 2000; ++i) {
    const Point2 p{coord(rng), coord(rng)};
    const Point2 c = centroid(spec, quantize(spec, p), tau);
    CHECK(std::abs(c.x - p.x) <= tau / 2.0 + 1e-12);
    CHECK(std::abs(c.y - p.y) <= tau / 2.0 + 1e-12);
    CHECK(std::hypot(c.x - p.x, c.y - p.y) <=
          tau * std::sqrt(2.0) / 2.0 + 1e-12);
  }
}

TEST_CASE("build_cell_map enumerates occupied cells in lexicographic order") {
  const GridSpec spec = spec_at_origin(1.0, 10.0);
  const std::vector<Point2> points{{0.1, 0.1}, {0.2, 0.3}, {5.5, 5.5}};
  const CellMap map = build_cell_map(spec, points);
  REQUIRE(map.k_fine() == 2);
  CHECK(map.fine_cell(0) == CellIndex{0, 0});
  CHECK(map.fine_cell(1) == CellIndex{5, 5});
  CHECK(map.fine_count(0) == 2);
  CHECK(map.fine_count(1) == 1);
  CHECK(map.fine_class_of(CellIndex{0, 0}) == 0);
  CHECK(map.fine_class_of(CellIndex{1, 1}) == std::nullopt);
}

TEST_CASE("build_cell_map with a coarse grid") {
  const GridSpec spec = spec_at_origin(1.0, 10.0, 2.0);
  const std::vector<Point2> points{{0.1, 0.1}, {1.5, 0.5}};
  const CellMap map = build_cell_map(spec, points);
  CHECK(map.k_fine() == 2);
  CHECK(map.k_coarse() == 1);  // both inside coarse cell (0,0)
  CHECK(map.coarse_cell(0) == CellIndex{0, 0});
}

TEST_CASE("build_cell_map rejects empty input") {
  const GridSpec spec = spec_at_origin(1.0, 10.0);
  CHECK_THROWS_AS(build_cell_map(spec, {}), EmptyDataset);
}

TEST_CASE("cell map is independent of point order") {
  const GridSpec spec = spec_at_origin(0.5, 30.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(0.0, 30.0);
  std::vector<Point2> points;
  for (int i = 0; i < 500; ++i) points.push_back({coord(rng), coord(rng)});

  const CellMap a = build_cell_map(spec, points);
  std::shuffle(points.begin(), points.end(), rng);
  const CellMap b = build_cell_map(spec, points);
  CHECK(serialize_cell_map(a) == serialize_cell_map(b));
}

TEST_CASE("bijectivity of class IDs") {
  const GridSpec spec = spec_at_origin(0.5, 30.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(0.0, 30.0);
  std::vector<Point2> points;
  for (int i = 0; i < 300; ++i) points.push_back({coord(rng), coord(rng)});
  const CellMap map = build_cell_map(spec, points);
  for (int id = 0; id < map.k_fine(); ++id)
    CHECK(map.fine_class_of(map.fine_cell(id)) == id);
}

TEST_CASE("coarse consistency when l is an integer multiple of tau") {
  const double tau = 0.4;
  const GridSpec spec = spec_at_origin(tau, 20.0, 5 * tau);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(0.0, 20.0);
  std::vector<Point2> points;
  for (int i = 0; i < 400; ++i) points.push_back({coord(rng), coord(rng)});
  const CellMap map = build_cell_map(spec, points);
  for (int id = 0; id < map.k_fine(); ++id) {
    const CellIndex fine = map.fine_cell(id);
    const CellIndex expected{static_cast<std::int64_t>(
                                 std::floor(static_cast<double>(fine.ix) / 5.0)),
                             static_cast<std::int64_t>(
                                 std::floor(static_cast<double>(fine.iy) / 5.0))};
    const CellIndex via_centroid =
        quantize(spec, map.fine_centroid(id), *spec.coarse_side);
    CHECK(via_centroid == expected);
  }
}

TEST_CASE("label_sample with adjacency") {
  const GridSpec spec = spec_at_origin(1.0, 10.0);
  const std::vector<Point2> points{{0.5, 0.5}, {1.5, 0.5}};
  const CellMap map = build_cell_map(spec, points);

  const QuantizedLabel with = label_sample(map, {0.5, 0.5}, true);
  CHECK(with.fine_class == 0);
  CHECK(with.extra_classes == std::vector<int>{1});

  const QuantizedLabel without = label_sample(map, {0.5, 0.5}, false);
  CHECK(without.fine_class == 0);
  CHECK(without.extra_classes.empty());
}

TEST_CASE("label_sample on an isolated cell has no extras") {
  const GridSpec spec = spec_at_origin(1.0, 10.0);
  const std::vector<Point2> points{{0.5, 0.5}, {5.5, 5.5}};
  const CellMap map = build_cell_map(spec, points);
  const QuantizedLabel label = label_sample(map, {5.5, 5.5}, true);
  CHECK(label.fine_class == 1);
  CHECK(label.extra_classes.empty());
}

TEST_CASE("label_sample signals unoccupied cells") {
  const GridSpec spec = spec_at_origin(1.0, 10.0);
  const std::vector<Point2> points{{0.5, 0.5}};
  const CellMap map = build_cell_map(spec, points);
  CHECK_THROWS_AS(label_sample(map, {3.5, 3.5}, false), UnoccupiedCell);
}

TEST_CASE("nearest occupied centroid basics") {
  const GridSpec spec = spec_at_origin(1.0, 10.0);
  const std::vector<Point2> points{{0.5, 0.5}, {5.5, 5.5}};
  const CellMap map = build_cell_map(spec, points);

  const Point2 near = nearest_occupied_centroid(map, {1.0, 1.0});
  CHECK(near.x == doctest::Approx(0.5));
  CHECK(near.y == doctest::Approx(0.5));

  const Point2 self = nearest_occupied_centroid(map, {5.5, 5.5});
  CHECK(self.x == doctest::Approx(5.5));
  CHECK(self.y == doctest::Approx(5.5));
}

TEST_CASE("nearest occupied centroid equals the exhaustive scan") {
  const GridSpec spec = spec_at_origin(0.8, 25.0);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coord(0.0, 25.0);
  std::vector<Point2> points;
  for (int i = 0; i < 200; ++i) points.push_back({coord(rng), coord(rng)});
  const CellMap map = build_cell_map(spec, points);

  for (int i = 0; i < 500; ++i) {
    const Point2 q{coord(rng), coord(rng)};
    const Point2 got = nearest_occupied_centroid(map, q);
    const Point2 expected = brute_force_nearest(map, q);
    CHECK(got.x == doctest::Approx(expected.x));
    CHECK(got.y == doctest::Approx(expected.y));
  }
}

TEST_CASE("cell map serialization round-trip") {
  const GridSpec spec = spec_at_origin(0.25, 10.0, 1.25);
  const std::vector<Point2> points{{0.1, 0.1}, {0.3, 0.1}, {7.7, 3.3}};
  const CellMap map = build_cell_map(spec, points);

  const std::string text = serialize_cell_map(map);
  const CellMap parsed = parse_cell_map(text);
  CHECK(serialize_cell_map(parsed) == text);
  CHECK(parsed.k_fine() == map.k_fine());
  CHECK(parsed.k_coarse() == map.k_coarse());
  CHECK(parsed.spec().tau == doctest::Approx(0.25));
  REQUIRE(parsed.spec().coarse_side.has_value());
  CHECK(*parsed.spec().coarse_side == doctest::Approx(1.25));
  for (int id = 0; id < map.k_fine(); ++id) {
    CHECK(parsed.fine_cell(id) == map.fine_cell(id));
    CHECK(parsed.fine_count(id) == map.fine_count(id));
  }
}

TEST_CASE("cell map parser rejects garbage") {
  CHECK_THROWS_AS(parse_cell_map("not a header"), FormatError);
  CHECK_THROWS_AS(parse_cell_map("1 0 0 0\nF 0 0 5 1\n"), FormatError);
  CHECK_THROWS_AS(parse_cell_map("1 0 0 0\nX 0 0 0 1\n"), FormatError);
}

TEST_CASE("GridSpec::fit anchors at min corner minus half a cell") {
  const std::vector<Point2> points{{1.0, 2.0}, {4.0, 6.0}};
  const GridSpec spec = GridSpec::fit(points, 0.5);
  CHECK(spec.origin_x == doctest::Approx(0.75));
  CHECK(spec.origin_y == doctest::Approx(1.75));
  for (const Point2& p : points) CHECK(spec.bounds.contains(p));
}

TEST_CASE("GridSpec validation") {
  GridSpec bad;
  bad.tau = -1.0;
  bad.bounds = Rect{0, 0, 1, 1};
  CHECK_THROWS(bad.validate());

  GridSpec coarse_bad;
  coarse_bad.tau = 1.0;
  coarse_bad.coarse_side = 0.5;  // must exceed tau
  coarse_bad.bounds = Rect{0, 0, 1, 1};
  CHECK_THROWS(coarse_bad.validate());
}
