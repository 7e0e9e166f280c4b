#include "noble/synth.hpp"

#include "noble/error.hpp"
#include "noble/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace noble {

OccupancyMask::OccupancyMask(std::vector<Rect> rects, std::vector<Rect> holes,
                             double cell_m)
    : rects_(std::move(rects)), holes_(std::move(holes)), cell_m_(cell_m) {
  if (rects_.empty()) throw ConfigError("mask needs at least one rectangle");
  if (!(cell_m_ > 0.0)) throw ConfigError("mask cell size must be positive");
  bounds_ = rects_.front();
  for (const Rect& r : rects_) {
    bounds_.min_x = std::min(bounds_.min_x, r.min_x);
    bounds_.min_y = std::min(bounds_.min_y, r.min_y);
    bounds_.max_x = std::max(bounds_.max_x, r.max_x);
    bounds_.max_y = std::max(bounds_.max_y, r.max_y);
  }
  nx_ = static_cast<int>(std::ceil(bounds_.width() / cell_m_));
  ny_ = static_cast<int>(std::ceil(bounds_.height() / cell_m_));
  cells_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_),
                0);
  for (int iy = 0; iy < ny_; ++iy) {
    for (int ix = 0; ix < nx_; ++ix) {
      const Point2 center{bounds_.min_x + (ix + 0.5) * cell_m_,
                          bounds_.min_y + (iy + 0.5) * cell_m_};
      bool inside = false;
      for (const Rect& r : rects_) inside = inside || r.contains(center);
      for (const Rect& h : holes_) inside = inside && !h.contains(center);
      if (inside) {
        const int flat = iy * nx_ + ix;
        cells_[static_cast<std::size_t>(flat)] = 1;
        accessible_.push_back(flat);
      }
    }
  }
  if (accessible_.empty()) throw ConfigError("mask has no accessible cells");
}

bool OccupancyMask::accessible(const Point2& p) const {
  if (!bounds_.contains(p)) return false;
  const int ix = static_cast<int>(std::floor((p.x - bounds_.min_x) / cell_m_));
  const int iy = static_cast<int>(std::floor((p.y - bounds_.min_y) / cell_m_));
  if (ix < 0 || ix >= nx_ || iy < 0 || iy >= ny_) return false;
  return cells_[static_cast<std::size_t>(iy * nx_ + ix)] != 0;
}

int OccupancyMask::building_of(const Point2& p) const {
  for (std::size_t i = 0; i < rects_.size(); ++i)
    if (rects_[i].contains(p)) return static_cast<int>(i);
  return -1;
}

bool OccupancyMask::cell_accessible(int ix, int iy) const {
  if (ix < 0 || ix >= nx_ || iy < 0 || iy >= ny_) return false;
  return cells_[static_cast<std::size_t>(iy * nx_ + ix)] != 0;
}

Point2 OccupancyMask::cell_center(int ix, int iy) const {
  return Point2{bounds_.min_x + (ix + 0.5) * cell_m_,
                bounds_.min_y + (iy + 0.5) * cell_m_};
}

std::vector<std::pair<int, int>> OccupancyMask::accessible_cells() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(accessible_.size());
  for (int flat : accessible_) out.emplace_back(flat % nx_, flat / nx_);
  return out;
}

std::vector<Point2> OccupancyMask::accessible_cell_centers() const {
  std::vector<Point2> centers;
  centers.reserve(accessible_.size());
  for (const auto& [ix, iy] : accessible_cells())
    centers.push_back(cell_center(ix, iy));
  return centers;
}

Point2 OccupancyMask::sample_point(std::mt19937_64& rng) const {
  std::uniform_int_distribution<std::size_t> cell_dist(0,
                                                       accessible_.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int flat = accessible_[cell_dist(rng)];
  const int iy = flat / nx_;
  const int ix = flat % nx_;
  return Point2{bounds_.min_x + (ix + unit(rng)) * cell_m_,
                bounds_.min_y + (iy + unit(rng)) * cell_m_};
}

OccupancyMask courtyard_mask(double cell_m) {
  // Left building is a ring around a hollow courtyard; right one is solid.
  return OccupancyMask({Rect{2, 2, 18, 22}, Rect{24, 2, 38, 22}},
                       {Rect{6, 6, 14, 18}}, cell_m);
}

OccupancyMask ring_corridor_mask(double cell_m) {
  return OccupancyMask({Rect{0, 0, 16, 10}}, {Rect{3, 3, 13, 7}}, cell_m);
}

double path_loss_rssi(const Point2& pos, const Point2& ap, double p0_dbm,
                      double exponent) {
  const double dist = std::max(distance(pos, ap), 0.01);
  return p0_dbm - 10.0 * exponent * std::log10(dist);
}

std::vector<Point2> grid_access_points(const OccupancyMask& mask, int nx,
                                       int ny) {
  if (nx < 1 || ny < 1) throw ConfigError("AP grid needs positive dimensions");
  const Rect& b = mask.bounds();
  std::vector<Point2> aps;
  aps.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      aps.push_back(Point2{
          b.min_x + (i + 0.5) * b.width() / nx,
          b.min_y + (j + 0.5) * b.height() / ny,
      });
    }
  }
  return aps;
}

WifiCorpus synth_wifi(const WifiSynthSpec& spec) {
  if (spec.access_points.empty())
    throw ConfigError("synth_wifi needs at least one access point");
  if (spec.n_samples < 2) throw ConfigError("n_samples must be >= 2");
  if (spec.test_fraction < 0.0 || spec.test_fraction >= 1.0)
    throw ConfigError("test_fraction must be in [0, 1)");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<WifiSample> samples;
  samples.reserve(static_cast<std::size_t>(spec.n_samples));
  for (int i = 0; i < spec.n_samples; ++i) {
    WifiSample s;
    s.position = spec.mask.sample_point(rng);
    const int building = spec.mask.building_of(s.position);
    if (building >= 0) s.building = building;
    s.rssi.reserve(spec.access_points.size());
    for (const Point2& ap : spec.access_points) {
      double v = path_loss_rssi(s.position, ap, spec.p0_dbm,
                                spec.path_loss_exponent);
      if (spec.noise_dbm > 0.0) v += spec.noise_dbm * noise(rng);
      v = std::clamp(v, kRssiFloorDbm, 0.0);
      s.rssi.push_back(v < spec.dropout_dbm ? kRssiNotDetected : v);
    }
    samples.push_back(std::move(s));
  }

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(
      spec.test_fraction * static_cast<double>(spec.n_samples)));
  const std::size_t n_train = samples.size() - n_test;

  WifiCorpus corpus;
  corpus.wap_count = static_cast<int>(spec.access_points.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& dest = i < n_train ? corpus.train : corpus.test;
    dest.push_back(std::move(samples[order[i]]));
  }

  corpus.meta["source"] = "synthetic-wifi";
  corpus.meta["seed"] = std::to_string(spec.seed);
  corpus.meta["p0_dbm"] = format_double(spec.p0_dbm);
  corpus.meta["path_loss_exponent"] = format_double(spec.path_loss_exponent);
  corpus.meta["noise_dbm"] = format_double(spec.noise_dbm);
  corpus.meta["dropout_dbm"] = format_double(spec.dropout_dbm);
  corpus.meta["mask_cell_m"] = format_double(spec.mask.cell_m());
  std::ostringstream aps;
  for (const Point2& ap : spec.access_points)
    aps << format_double(ap.x) << ' ' << format_double(ap.y) << ';';
  corpus.meta["access_points"] = aps.str();
  return corpus;
}

// ---------------------------------------------------------------------------
// IMU walk synthesis

namespace {

/// Smooth start/stop weight profile; weights sum to ~1 so the per-reading
/// contributions telescope back to the gap total under plain cumulative
/// sums.
std::vector<double> motion_weights(int d) {
  std::vector<double> w(static_cast<std::size_t>(d));
  double sum = 0.0;
  for (int k = 0; k < d; ++k) {
    const double s = std::sin(M_PI * (k + 0.5) / d);
    w[static_cast<std::size_t>(k)] = s * s;
    sum += s * s;
  }
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace

ReferenceWalk synth_reference_walk(const ImuSynthSpec& spec) {
  if (spec.walk_steps < 1) throw ConfigError("walk_steps must be positive");
  if (spec.readings_per_gap < 2) throw ConfigError("readings_per_gap too small");
  if (spec.sensor_axes != 6)
    throw ConfigError("the walk generator emits 6 sensor axes");

  const auto cells = spec.mask.accessible_cells();
  std::mt19937_64 rng(spec.seed);

  // Non-reversing random walk over accessible lattice cells; the U-turn is
  // allowed only at dead ends.
  std::vector<std::pair<int, int>> walk_cells;
  walk_cells.push_back(cells.front());
  std::pair<int, int> prev{-1, -1};
  for (int s = 0; s < spec.walk_steps; ++s) {
    const auto [ix, iy] = walk_cells.back();
    std::vector<std::pair<int, int>> options;
    for (const auto& [dx, dy] :
         {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
      const std::pair<int, int> next{ix + dx, iy + dy};
      if (spec.mask.cell_accessible(next.first, next.second) && next != prev)
        options.push_back(next);
    }
    if (options.empty()) {  // dead end
      if (prev.first < 0)
        throw InsufficientWalk("walk start has no accessible neighbor");
      options.push_back(prev);
    }
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    prev = walk_cells.back();
    walk_cells.push_back(options[pick(rng)]);
  }

  // Distinct reference locations in first-visit order, optionally jittered
  // off their cell centers (fixed offset per location).
  ReferenceWalk walk;
  std::map<std::pair<int, int>, int> ref_id;
  std::uniform_real_distribution<double> jitter(-spec.waypoint_jitter,
                                                spec.waypoint_jitter);
  for (const auto& cell : walk_cells) {
    auto it = ref_id.find(cell);
    if (it == ref_id.end()) {
      it = ref_id.emplace(cell, static_cast<int>(walk.locations.size())).first;
      Point2 location = spec.mask.cell_center(cell.first, cell.second);
      if (spec.waypoint_jitter > 0.0) {
        location.x += jitter(rng);
        location.y += jitter(rng);
      }
      walk.locations.push_back(location);
    }
    walk.visit_order.push_back(it->second);
  }

  const int d = spec.readings_per_gap;
  const std::vector<double> weights = motion_weights(d);
  const double nominal_duration = spec.mask.cell_m() / spec.speed_mps;
  const double dt = nominal_duration / d;
  std::normal_distribution<double> gauss(0.0, 1.0);

  double prev_heading = 0.0;
  double walker_heading = 0.0;  // continuous true heading, radians
  bool have_heading = false;
  for (std::size_t g = 0; g + 1 < walk_cells.size(); ++g) {
    const Point2 from =
        walk.locations[static_cast<std::size_t>(walk.visit_order[g])];
    const Point2 to =
        walk.locations[static_cast<std::size_t>(walk.visit_order[g + 1])];
    const double dx = to.x - from.x;
    const double dy = to.y - from.y;
    const double heading = std::atan2(dy, dx);
    double turn = 0.0;
    if (have_heading) {
      turn = heading - prev_heading;
      while (turn > M_PI) turn -= 2.0 * M_PI;
      while (turn < -M_PI) turn += 2.0 * M_PI;
    } else {
      walker_heading = heading;  // the walk starts already facing its move
    }
    prev_heading = heading;
    have_heading = true;

    // World-frame profile first: per-tick velocities whose cumulative sums
    // telescope to the exact gap displacement.
    Matrix seg(d, 6);
    double vx_prev = 0.0, vy_prev = 0.0;
    for (int k = 0; k < d; ++k) {
      const double w = weights[static_cast<std::size_t>(k)];
      const double yaw_rate = turn * w / dt;
      const double vx = dx * w / dt;
      const double vy = dy * w / dt;
      const double ax_world = (vx - vx_prev) / dt;
      const double ay_world = (vy - vy_prev) / dt;
      vx_prev = vx;
      vy_prev = vy;

      // Body-frame recording rotates by the heading reached after this
      // tick's yaw increment.
      walker_heading += yaw_rate * dt;
      if (spec.body_frame) {
        const double c = std::cos(walker_heading);
        const double s = std::sin(walker_heading);
        seg(k, 0) = c * ax_world + s * ay_world;
        seg(k, 1) = -s * ax_world + c * ay_world;
      } else {
        seg(k, 0) = ax_world;
        seg(k, 1) = ay_world;
      }
      seg(k, 2) = spec.gravity;
      seg(k, 3) = 0.0;
      seg(k, 4) = 0.0;
      seg(k, 5) = yaw_rate;
    }
    if (spec.accel_gain > 0.0) {
      const double gain = 1.0 + spec.accel_gain * gauss(rng);
      seg.col(0) *= gain;
      seg.col(1) *= gain;
    }
    if (spec.accel_bias > 0.0) {
      seg.col(0).array() += spec.accel_bias * gauss(rng);
      seg.col(1).array() += spec.accel_bias * gauss(rng);
    }
    if (spec.gyro_bias > 0.0) {
      seg.col(5).array() += spec.gyro_bias * gauss(rng);
    }
    if (spec.accel_noise > 0.0 || spec.gyro_noise > 0.0) {
      for (int k = 0; k < d; ++k) {
        for (int a = 0; a < 3; ++a) seg(k, a) += spec.accel_noise * gauss(rng);
        for (int a = 3; a < 6; ++a) seg(k, a) += spec.gyro_noise * gauss(rng);
      }
    }
    walk.gap_segments.push_back(std::move(seg));
    walk.gap_displacements.push_back(Point2{dx, dy});
  }
  return walk;
}

ImuCorpus synth_imu(const ImuSynthSpec& spec) {
  const ReferenceWalk walk = synth_reference_walk(spec);
  ImuCorpus corpus =
      build_imu_paths(walk, spec.max_len, spec.count, spec.seed + 1);
  corpus.meta["source"] = "synthetic-imu";
  corpus.meta["seed"] = std::to_string(spec.seed);
  corpus.meta["walk_steps"] = std::to_string(spec.walk_steps);
  corpus.meta["step_m"] = format_double(spec.mask.cell_m());
  corpus.meta["speed_mps"] = format_double(spec.speed_mps);
  corpus.meta["accel_noise"] = format_double(spec.accel_noise);
  corpus.meta["gyro_noise"] = format_double(spec.gyro_noise);
  return corpus;
}

}  // namespace noble
