#pragma once

#include "noble/dataset.hpp"
#include "noble/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace noble {

/// Accessible-area mask: the union of rectangles minus the union of holes,
/// rasterized to cell_m resolution. Buildings are identified by rectangle
/// index.
class OccupancyMask {
 public:
  OccupancyMask(std::vector<Rect> rects, std::vector<Rect> holes,
                double cell_m);

  const Rect& bounds() const { return bounds_; }
  double cell_m() const { return cell_m_; }

  bool accessible(const Point2& p) const;
  /// Rectangle index containing the point, or -1.
  int building_of(const Point2& p) const;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  bool cell_accessible(int ix, int iy) const;
  Point2 cell_center(int ix, int iy) const;

  /// Raster indices of all accessible cells, row-major order.
  std::vector<std::pair<int, int>> accessible_cells() const;

  /// Centers of all accessible raster cells, row-major order.
  std::vector<Point2> accessible_cell_centers() const;

  /// Uniform draw over the accessible area: uniform accessible cell, then
  /// uniform position within it.
  Point2 sample_point(std::mt19937_64& rng) const;

 private:
  std::vector<Rect> rects_;
  std::vector<Rect> holes_;
  double cell_m_;
  Rect bounds_;
  int nx_ = 0, ny_ = 0;
  std::vector<std::uint8_t> cells_;
  std::vector<int> accessible_;  // flat indices of accessible cells
};

/// Two buildings with a hollow courtyard in the left one; the structure the
/// synthetic Wi-Fi benchmarks exercise.
OccupancyMask courtyard_mask(double cell_m = 1.0);

/// Rectangular ring corridor for lattice walks.
OccupancyMask ring_corridor_mask(double cell_m = 1.0);

/// Free-space path loss with log-distance decay; distance is floored at
/// 0.01 m to keep the log finite.
double path_loss_rssi(const Point2& pos, const Point2& ap, double p0_dbm,
                      double exponent);

struct WifiSynthSpec {
  OccupancyMask mask = courtyard_mask();
  std::vector<Point2> access_points;
  int n_samples = 3000;
  double noise_dbm = 3.0;
  double p0_dbm = -30.0;
  double path_loss_exponent = 2.2;
  double dropout_dbm = -95.0;  // weaker readings become the +100 sentinel
  double test_fraction = 0.2;
  std::uint64_t seed = 1;
};

/// Evenly spaced AP layout across the mask bounds (APs may sit in
/// inaccessible area; only sample positions are mask-constrained).
std::vector<Point2> grid_access_points(const OccupancyMask& mask, int nx,
                                       int ny);

/// Draws sample positions uniformly over the accessible area and fills raw
/// RSSI vectors from the log-distance model plus Gaussian noise, clamped to
/// [-105, 0] with dropout to the sentinel below dropout_dbm. Building IDs
/// come from the mask rectangles. Deterministic per seed.
WifiCorpus synth_wifi(const WifiSynthSpec& spec);

struct ImuSynthSpec {
  OccupancyMask mask = ring_corridor_mask();
  int walk_steps = 400;       // gaps in the reference walk; the lattice
                              // pitch is the mask cell size
  int readings_per_gap = 768; // d
  int sensor_axes = 6;        // n: ax ay az gx gy gz
  double speed_mps = 1.25;
  double accel_noise = 0.1;   // m/s^2, white, per reading
  double gyro_noise = 0.02;   // rad/s, white, per reading
  /// Per-gap sensor bias std. A yaw-rate bias is the classic dead-reckoning
  /// failure: the heading estimate drifts, so the accumulated displacement
  /// rotates away from the truth and the error grows with path length.
  double accel_bias = 0.0;
  double gyro_bias = 0.0;
  /// Per-gap multiplicative accelerometer gain error std (gain ~ N(1, s)).
  /// With jittered waypoints the true step length is continuous, so a gain
  /// error is indistinguishable from a longer or shorter step and the
  /// displacement error it causes accumulates along the path.
  double accel_gain = 0.0;
  /// Reference points sit at their lattice cell center plus a fixed
  /// uniform(-jitter, jitter) offset per axis, so gap displacements take
  /// continuous values while the walk still follows the corridor.
  double waypoint_jitter = 0.0;
  /// Body-frame recording (the default) rotates the accelerometer by the
  /// instantaneous heading, so decoding requires gyro integration and a
  /// straight gap carries no absolute direction. World-frame recording
  /// keeps displacement a linear functional of the samples.
  bool body_frame = true;
  double gravity = 9.81;
  int max_len = 15;
  int count = 1500;
  std::uint64_t seed = 1;
};

/// Simulates a non-reversing lattice walk over the mask and the ideal IMU
/// profile of every gap, recorded in the walker's body frame. The world
/// acceleration samples are finite differences of a smooth discrete
/// velocity profile and are rotated by the instantaneous heading (the
/// cumulative sum of the true yaw rate), so noiseless dead reckoning --
/// integrate the z gyro for heading, rotate the accelerometer back to the
/// world frame, double-integrate from rest -- recovers every gap
/// displacement exactly.
ReferenceWalk synth_reference_walk(const ImuSynthSpec& spec);

/// synth_reference_walk + build_imu_paths with the spec's count/max_len.
ImuCorpus synth_imu(const ImuSynthSpec& spec);

}  // namespace noble
