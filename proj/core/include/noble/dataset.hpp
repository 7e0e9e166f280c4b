#pragma once

#include "noble/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace noble {

/// Sentinel stored in raw RSSI vectors when a WAP was not detected.
inline constexpr double kRssiNotDetected = 100.0;
/// Weakest representable signal; the sentinel folds onto this during
/// normalization so "absent" sits just below the weakest detection.
inline constexpr double kRssiFloorDbm = -105.0;

struct WifiSample {
  std::vector<double> rssi;  // raw dBm (+100 sentinel) or normalized [0,1]
  Point2 position;
  std::optional<int> building;
  std::optional<int> floor;
  std::optional<int> space_id;
};

struct Normalization {
  double floor_dbm = kRssiFloorDbm;
  double scale = -kRssiFloorDbm;
};

struct WifiCorpus {
  std::vector<WifiSample> train;
  std::vector<WifiSample> test;
  int wap_count = 0;
  std::optional<Normalization> normalization;
  std::map<std::string, std::string> meta;  // provenance: source, seed, ...
};

/// Loads the published two-file layout (WAP001..WAP520, LONGITUDE, LATITUDE,
/// FLOOR, BUILDINGID, SPACEID, ...). Coordinates are translated so the
/// training split's min corner is (0,0); the offset lands in meta. With an
/// empty test_path the test split is carved from the training rows instead:
/// a seeded shuffle reserving round(20%) of them.
WifiCorpus load_ujiindoorloc(const std::string& train_path,
                             const std::string& test_path,
                             std::uint64_t seed = 0);

/// Single-file layout with 168 WAP columns; reserves `test_count` rows as
/// the test split, taken as the tail of a seeded shuffle.
WifiCorpus load_ipin2016(const std::string& path, std::uint64_t seed = 0,
                         int test_count = 185);

/// Replaces the +100 sentinel with the floor (-105 dBm) and maps every
/// entry to [0,1] via (v - floor) / (0 - floor), clamping below the floor.
/// Throws AlreadyNormalized when the corpus already carries a
/// normalization record; see ensure_normalized for the idempotent form.
WifiCorpus normalize_rssi(const WifiCorpus& corpus);

/// normalize_rssi if needed, identity otherwise.
WifiCorpus ensure_normalized(const WifiCorpus& corpus);

/// Sample vectors stacked as matrix rows.
Matrix rssi_matrix(const std::vector<WifiSample>& samples);
/// Positions stacked as n x 2 rows.
Matrix coord_matrix(const std::vector<WifiSample>& samples);
std::vector<Point2> positions_of(const std::vector<WifiSample>& samples);

// ---------------------------------------------------------------------------
// IMU paths

/// One walking path: a run of consecutive reference-walk gaps. Segment
/// matrices live in the owning corpus pool so overlapping paths share them.
struct ImuPath {
  int start_ref = 0;  // reference-location ID
  Point2 start_position;
  Point2 end_position;
  std::vector<std::size_t> segment_ids;  // walk order, into ImuCorpus::segments

  std::size_t length() const { return segment_ids.size(); }
};

struct ImuCorpus {
  int readings_per_segment = 0;  // rows of each segment matrix
  int sensor_axes = 0;           // columns
  std::vector<Matrix> segments;  // shared pool
  std::vector<Point2> reference_locations;
  std::vector<ImuPath> paths;
  std::vector<std::size_t> train_idx, val_idx, test_idx;
  /// Ground-truth displacement per pool segment; present for synthetic data.
  std::vector<Point2> segment_displacements;
  std::map<std::string, std::string> meta;
};

/// A recorded walk: the ordered reference points visited and one IMU
/// segment per gap between consecutive points.
struct ReferenceWalk {
  std::vector<Point2> locations;          // distinct reference coordinates
  std::vector<int> visit_order;           // walk sequence, location IDs
  std::vector<Matrix> gap_segments;       // visit_order.size() - 1 entries
  std::vector<Point2> gap_displacements;  // ground truth, may be empty

  std::size_t gap_count() const {
    return visit_order.empty() ? 0 : visit_order.size() - 1;
  }
};

/// Randomized path construction: uniformly pick a start position on the
/// walk, a length in [1, min(max_len, gaps remaining)], and concatenate the
/// covered gap segments. The end position is the reference coordinate
/// exactly `length` gaps ahead. Splits are a seeded shuffle in
/// 4389:1096:1372 proportion.
ImuCorpus build_imu_paths(const ReferenceWalk& walk, int max_len, int count,
                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Corpus directories

/// meta.json + samples.csv. Raw RSSI only; normalization happens in memory.
void save_wifi_corpus(const WifiCorpus& corpus, const std::string& dir);
WifiCorpus load_wifi_corpus(const std::string& dir);

/// meta.json + paths/NNNNNN.bin, one little-endian binary file per path:
/// 16-byte header (magic "NOBL", version u16, L u16, d u32, n u32) followed
/// by L row-major d x n float32 segments. Identical segment payloads are
/// pooled again on load.
void save_imu_corpus(const ImuCorpus& corpus, const std::string& dir);
ImuCorpus load_imu_corpus(const std::string& dir);

}  // namespace noble
