#include "noble/dataset.hpp"

#include "noble/error.hpp"
#include "noble/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>
#include <unordered_map>

namespace noble {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_double(const std::string& field, std::size_t row, std::size_t col) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw FormatError("malformed numeric field '" + field + "'", row, col);
  return value;
}

int parse_int(const std::string& field, std::size_t row, std::size_t col) {
  return static_cast<int>(std::llround(parse_double(field, row, col)));
}

struct WifiTable {
  std::vector<WifiSample> samples;
  int wap_count = 0;
};

/// Header-driven reader for the published fingerprint CSV layouts: WAP*
/// columns hold RSSI, the rest are picked up by name.
WifiTable read_wifi_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open " + path);

  std::string line;
  if (!std::getline(in, line))
    throw FormatError("missing header row in " + path, 1, 1);
  const std::vector<std::string> header = split_csv_line(line);

  std::vector<std::size_t> wap_cols;
  std::optional<std::size_t> lon_col, lat_col, floor_col, building_col,
      space_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& name = header[i];
    if (name.rfind("WAP", 0) == 0) {
      wap_cols.push_back(i);
    } else if (name == "LONGITUDE") {
      lon_col = i;
    } else if (name == "LATITUDE") {
      lat_col = i;
    } else if (name == "FLOOR") {
      floor_col = i;
    } else if (name == "BUILDINGID") {
      building_col = i;
    } else if (name == "SPACEID") {
      space_col = i;
    }
  }
  if (wap_cols.empty())
    throw FormatError("no WAP columns in header of " + path, 1, 1);
  if (!lon_col || !lat_col)
    throw FormatError("missing LONGITUDE/LATITUDE columns in " + path, 1, 1);

  WifiTable table;
  table.wap_count = static_cast<int>(wap_cols.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw FormatError("expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(fields.size()),
                        row, 1);
    WifiSample sample;
    sample.rssi.reserve(wap_cols.size());
    for (std::size_t c : wap_cols) {
      const double v = parse_double(fields[c], row, c + 1);
      const bool detected = v >= -110.0 && v <= 0.0;
      if (!detected && v != kRssiNotDetected)
        throw FormatError("RSSI value " + fields[c] +
                              " outside [-110, 0] and not the +100 sentinel",
                          row, c + 1);
      sample.rssi.push_back(v);
    }
    sample.position.x = parse_double(fields[*lon_col], row, *lon_col + 1);
    sample.position.y = parse_double(fields[*lat_col], row, *lat_col + 1);
    if (floor_col)
      sample.floor = parse_int(fields[*floor_col], row, *floor_col + 1);
    if (building_col)
      sample.building =
          parse_int(fields[*building_col], row, *building_col + 1);
    if (space_col)
      sample.space_id = parse_int(fields[*space_col], row, *space_col + 1);
    table.samples.push_back(std::move(sample));
  }
  if (table.samples.empty()) throw EmptyDataset(path + " has no data rows");
  return table;
}

/// Translates all coordinates so the training split's min corner is (0,0).
void recenter(WifiCorpus& corpus) {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  for (const WifiSample& s : corpus.train) {
    min_x = std::min(min_x, s.position.x);
    min_y = std::min(min_y, s.position.y);
  }
  for (auto* split : {&corpus.train, &corpus.test}) {
    for (WifiSample& s : *split) {
      s.position.x -= min_x;
      s.position.y -= min_y;
    }
  }
  corpus.meta["offset_x"] = format_double(min_x);
  corpus.meta["offset_y"] = format_double(min_y);
}

}  // namespace

WifiCorpus load_ujiindoorloc(const std::string& train_path,
                             const std::string& test_path,
                             std::uint64_t seed) {
  WifiTable train = read_wifi_csv(train_path);
  if (train.wap_count != 520)
    throw FormatError("UJIIndoorLoc expects 520 WAP columns, found " +
                          std::to_string(train.wap_count),
                      1, 1);
  WifiCorpus corpus;
  corpus.wap_count = train.wap_count;
  corpus.meta["source"] = "ujiindoorloc";
  corpus.meta["seed"] = std::to_string(seed);

  if (!test_path.empty()) {
    WifiTable test = read_wifi_csv(test_path);
    if (test.wap_count != train.wap_count)
      throw FormatError("train/test WAP counts differ", 1, 1);
    corpus.train = std::move(train.samples);
    corpus.test = std::move(test.samples);
    corpus.meta["protocol"] = "file-split";
  } else {
    // Reserve 20% of the training rows, the count used in the published
    // UJIIndoorLoc evaluations (3,987 of 19,937).
    std::vector<std::size_t> order(train.samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_test = static_cast<std::size_t>(
        std::llround(0.2 * static_cast<double>(train.samples.size())));
    const std::size_t n_train = train.samples.size() - n_test;
    for (std::size_t i = 0; i < order.size(); ++i) {
      auto& dest = i < n_train ? corpus.train : corpus.test;
      dest.push_back(std::move(train.samples[order[i]]));
    }
    corpus.meta["protocol"] = "carved-20pct";
  }
  recenter(corpus);
  return corpus;
}

WifiCorpus load_ipin2016(const std::string& path, std::uint64_t seed,
                         int test_count) {
  WifiTable table = read_wifi_csv(path);
  if (table.wap_count != 168)
    throw FormatError("IPIN2016 expects 168 WAP columns, found " +
                          std::to_string(table.wap_count),
                      1, 1);
  if (test_count < 1 ||
      static_cast<std::size_t>(test_count) >= table.samples.size())
    throw ConfigError("test_count must be in [1, sample count)");

  std::vector<std::size_t> order(table.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  WifiCorpus corpus;
  corpus.wap_count = table.wap_count;
  corpus.meta["source"] = "ipin2016";
  corpus.meta["seed"] = std::to_string(seed);
  const std::size_t n_train =
      table.samples.size() - static_cast<std::size_t>(test_count);
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& dest = i < n_train ? corpus.train : corpus.test;
    dest.push_back(std::move(table.samples[order[i]]));
  }
  recenter(corpus);
  return corpus;
}

WifiCorpus normalize_rssi(const WifiCorpus& corpus) {
  if (corpus.normalization)
    throw AlreadyNormalized("corpus already carries a normalization record");
  WifiCorpus out = corpus;
  out.normalization = Normalization{};
  const double floor_dbm = out.normalization->floor_dbm;
  const double scale = 0.0 - floor_dbm;
  for (auto* split : {&out.train, &out.test}) {
    for (WifiSample& s : *split) {
      for (double& v : s.rssi) {
        if (v == kRssiNotDetected) {
          v = 0.0;
        } else {
          v = (std::clamp(v, floor_dbm, 0.0) - floor_dbm) / scale;
        }
      }
    }
  }
  return out;
}

WifiCorpus ensure_normalized(const WifiCorpus& corpus) {
  return corpus.normalization ? corpus : normalize_rssi(corpus);
}

Matrix rssi_matrix(const std::vector<WifiSample>& samples) {
  if (samples.empty()) throw EmptyDataset("no samples");
  Matrix m(static_cast<Eigen::Index>(samples.size()),
           static_cast<Eigen::Index>(samples.front().rssi.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& rssi = samples[i].rssi;
    if (rssi.size() != static_cast<std::size_t>(m.cols()))
      throw DimensionMismatch("inconsistent RSSI vector length");
    for (std::size_t j = 0; j < rssi.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rssi[j];
  }
  return m;
}

Matrix coord_matrix(const std::vector<WifiSample>& samples) {
  Matrix m(static_cast<Eigen::Index>(samples.size()), 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = samples[i].position.x;
    m(static_cast<Eigen::Index>(i), 1) = samples[i].position.y;
  }
  return m;
}

std::vector<Point2> positions_of(const std::vector<WifiSample>& samples) {
  std::vector<Point2> out;
  out.reserve(samples.size());
  for (const WifiSample& s : samples) out.push_back(s.position);
  return out;
}

// ---------------------------------------------------------------------------
// IMU path construction

ImuCorpus build_imu_paths(const ReferenceWalk& walk, int max_len, int count,
                          std::uint64_t seed) {
  if (walk.visit_order.size() < 2)
    throw InsufficientWalk("reference walk needs at least 2 points");
  if (walk.gap_segments.size() != walk.gap_count())
    throw InsufficientWalk("walk needs one segment per gap");
  if (max_len < 1 || max_len > 50)
    throw ConfigError("max_len must be in [1, 50]");
  if (count < 1) throw ConfigError("count must be positive");
  for (int id : walk.visit_order) {
    if (id < 0 || static_cast<std::size_t>(id) >= walk.locations.size())
      throw InsufficientWalk("visit_order references an unknown location");
  }

  ImuCorpus corpus;
  corpus.segments = walk.gap_segments;
  corpus.segment_displacements = walk.gap_displacements;
  corpus.reference_locations = walk.locations;
  corpus.readings_per_segment = static_cast<int>(corpus.segments.front().rows());
  corpus.sensor_axes = static_cast<int>(corpus.segments.front().cols());
  for (const Matrix& seg : corpus.segments) {
    if (seg.rows() != corpus.readings_per_segment ||
        seg.cols() != corpus.sensor_axes)
      throw InsufficientWalk("all gap segments must share (d, n)");
  }

  std::mt19937_64 rng(seed);
  const std::size_t gaps = walk.gap_count();
  std::uniform_int_distribution<std::size_t> start_dist(0, gaps - 1);
  corpus.paths.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const std::size_t start = start_dist(rng);
    const std::size_t remaining = gaps - start;
    std::uniform_int_distribution<std::size_t> len_dist(
        1, std::min<std::size_t>(static_cast<std::size_t>(max_len), remaining));
    const std::size_t length = len_dist(rng);

    ImuPath path;
    path.start_ref = walk.visit_order[start];
    path.start_position = walk.locations[static_cast<std::size_t>(path.start_ref)];
    path.end_position =
        walk.locations[static_cast<std::size_t>(walk.visit_order[start + length])];
    path.segment_ids.resize(length);
    std::iota(path.segment_ids.begin(), path.segment_ids.end(), start);
    corpus.paths.push_back(std::move(path));
  }

  // Split proportions follow the 4389:1096:1372 convention.
  std::vector<std::size_t> order(corpus.paths.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n = static_cast<double>(count);
  const auto n_test =
      static_cast<std::size_t>(std::llround(n * 1372.0 / 6857.0));
  const auto n_val =
      static_cast<std::size_t>(std::llround(n * 1096.0 / 6857.0));
  const std::size_t n_train = order.size() - n_val - n_test;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < n_train)
      corpus.train_idx.push_back(order[i]);
    else if (i < n_train + n_val)
      corpus.val_idx.push_back(order[i]);
    else
      corpus.test_idx.push_back(order[i]);
  }
  corpus.meta["seed"] = std::to_string(seed);
  corpus.meta["max_len"] = std::to_string(max_len);
  return corpus;
}

// ---------------------------------------------------------------------------
// Corpus directories

void save_wifi_corpus(const WifiCorpus& corpus, const std::string& dir) {
  fs::create_directories(dir);

  ordered_json meta;
  meta["kind"] = "wifi";
  meta["wap_count"] = corpus.wap_count;
  meta["n_train"] = corpus.train.size();
  meta["n_test"] = corpus.test.size();
  ordered_json extra = ordered_json::object();
  for (const auto& [k, v] : corpus.meta) extra[k] = v;
  meta["meta"] = extra;
  atomic_write_file(dir + "/meta.json", meta.dump(2) + "\n");

  std::ostringstream csv;
  csv << "split,building,floor,space_id,x,y";
  for (int w = 0; w < corpus.wap_count; ++w) csv << ",rssi" << w;
  csv << '\n';
  auto write_split = [&](const std::vector<WifiSample>& samples,
                         const char* name) {
    for (const WifiSample& s : samples) {
      csv << name << ',';
      if (s.building) csv << *s.building;
      csv << ',';
      if (s.floor) csv << *s.floor;
      csv << ',';
      if (s.space_id) csv << *s.space_id;
      csv << ',' << format_double(s.position.x) << ','
          << format_double(s.position.y);
      for (double v : s.rssi) csv << ',' << format_double(v);
      csv << '\n';
    }
  };
  write_split(corpus.train, "train");
  write_split(corpus.test, "test");
  atomic_write_file(dir + "/samples.csv", csv.str());
}

WifiCorpus load_wifi_corpus(const std::string& dir) {
  const auto meta = ordered_json::parse(read_file(dir + "/meta.json"));
  if (meta.at("kind").get<std::string>() != "wifi")
    throw FormatError(dir + " is not a wifi corpus directory", 1, 1);

  WifiCorpus corpus;
  corpus.wap_count = meta.at("wap_count").get<int>();
  for (const auto& [k, v] : meta.at("meta").items())
    corpus.meta[k] = v.get<std::string>();

  std::ifstream in(dir + "/samples.csv");
  if (!in) throw MissingFile("cannot open " + dir + "/samples.csv");
  std::string line;
  std::getline(in, line);  // header
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != static_cast<std::size_t>(6 + corpus.wap_count))
      throw FormatError("wrong field count", row, 1);
    WifiSample s;
    if (!fields[1].empty()) s.building = parse_int(fields[1], row, 2);
    if (!fields[2].empty()) s.floor = parse_int(fields[2], row, 3);
    if (!fields[3].empty()) s.space_id = parse_int(fields[3], row, 4);
    s.position.x = parse_double(fields[4], row, 5);
    s.position.y = parse_double(fields[5], row, 6);
    s.rssi.reserve(static_cast<std::size_t>(corpus.wap_count));
    for (int w = 0; w < corpus.wap_count; ++w)
      s.rssi.push_back(
          parse_double(fields[static_cast<std::size_t>(6 + w)], row,
                       static_cast<std::size_t>(7 + w)));
    if (fields[0] == "train")
      corpus.train.push_back(std::move(s));
    else if (fields[0] == "test")
      corpus.test.push_back(std::move(s));
    else
      throw FormatError("unknown split '" + fields[0] + "'", row, 1);
  }
  if (corpus.train.empty() && corpus.test.empty())
    throw EmptyDataset(dir + " holds no samples");
  return corpus;
}

namespace {

constexpr std::uint16_t kPathFileVersion = 1;

std::string path_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.bin", index);
  return buf;
}

std::string encode_path_file(const ImuCorpus& corpus, const ImuPath& path) {
  std::ostringstream out(std::ios::binary);
  out.write("NOBL", 4);
  write_u16(out, kPathFileVersion);
  write_u16(out, static_cast<std::uint16_t>(path.length()));
  write_u32(out, static_cast<std::uint32_t>(corpus.readings_per_segment));
  write_u32(out, static_cast<std::uint32_t>(corpus.sensor_axes));
  for (std::size_t id : path.segment_ids) {
    const Matrix& seg = corpus.segments.at(id);
    for (Eigen::Index r = 0; r < seg.rows(); ++r)
      for (Eigen::Index c = 0; c < seg.cols(); ++c)
        write_f32(out, static_cast<float>(seg(r, c)));
  }
  return out.str();
}

}  // namespace

void save_imu_corpus(const ImuCorpus& corpus, const std::string& dir) {
  fs::create_directories(dir + "/paths");

  ordered_json meta;
  meta["kind"] = "imu";
  meta["d"] = corpus.readings_per_segment;
  meta["n"] = corpus.sensor_axes;
  ordered_json refs = ordered_json::array();
  for (const Point2& p : corpus.reference_locations)
    refs.push_back({p.x, p.y});
  meta["reference_locations"] = refs;

  ordered_json paths = ordered_json::array();
  for (std::size_t i = 0; i < corpus.paths.size(); ++i) {
    const ImuPath& path = corpus.paths[i];
    ordered_json entry;
    entry["file"] = "paths/" + path_file_name(i);
    entry["start_ref"] = path.start_ref;
    entry["start"] = {path.start_position.x, path.start_position.y};
    entry["end"] = {path.end_position.x, path.end_position.y};
    paths.push_back(entry);
  }
  meta["paths"] = paths;
  meta["splits"] = {{"train", corpus.train_idx},
                    {"val", corpus.val_idx},
                    {"test", corpus.test_idx}};
  ordered_json extra = ordered_json::object();
  for (const auto& [k, v] : corpus.meta) extra[k] = v;
  meta["meta"] = extra;
  atomic_write_file(dir + "/meta.json", meta.dump(2) + "\n");

  for (std::size_t i = 0; i < corpus.paths.size(); ++i) {
    atomic_write_file(dir + "/paths/" + path_file_name(i),
                      encode_path_file(corpus, corpus.paths[i]));
  }
}

ImuCorpus load_imu_corpus(const std::string& dir) {
  const auto meta = ordered_json::parse(read_file(dir + "/meta.json"));
  if (meta.at("kind").get<std::string>() != "imu")
    throw FormatError(dir + " is not an imu corpus directory", 1, 1);

  ImuCorpus corpus;
  corpus.readings_per_segment = meta.at("d").get<int>();
  corpus.sensor_axes = meta.at("n").get<int>();
  for (const auto& ref : meta.at("reference_locations"))
    corpus.reference_locations.push_back(
        Point2{ref.at(0).get<double>(), ref.at(1).get<double>()});
  corpus.train_idx = meta.at("splits").at("train").get<std::vector<std::size_t>>();
  corpus.val_idx = meta.at("splits").at("val").get<std::vector<std::size_t>>();
  corpus.test_idx = meta.at("splits").at("test").get<std::vector<std::size_t>>();
  for (const auto& [k, v] : meta.at("meta").items())
    corpus.meta[k] = v.get<std::string>();

  std::unordered_map<std::string, std::size_t> pool;  // payload -> segment id
  for (const auto& entry : meta.at("paths")) {
    ImuPath path;
    path.start_ref = entry.at("start_ref").get<int>();
    path.start_position = Point2{entry.at("start").at(0).get<double>(),
                                 entry.at("start").at(1).get<double>()};
    path.end_position = Point2{entry.at("end").at(0).get<double>(),
                               entry.at("end").at(1).get<double>()};

    const std::string file = dir + "/" + entry.at("file").get<std::string>();
    std::ifstream in(file, std::ios::binary);
    if (!in) throw MissingFile("cannot open " + file);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != "NOBL")
      throw FormatError("bad path file magic in " + file, 1, 1);
    const std::uint16_t version = read_u16(in);
    if (version != kPathFileVersion)
      throw FormatError("unsupported path file version", 1, 1);
    const std::uint16_t length = read_u16(in);
    const auto d = static_cast<int>(read_u32(in));
    const auto n = static_cast<int>(read_u32(in));
    if (d != corpus.readings_per_segment || n != corpus.sensor_axes)
      throw FormatError("segment shape disagrees with meta.json in " + file, 1,
                        1);

    for (std::uint16_t s = 0; s < length; ++s) {
      std::string payload(static_cast<std::size_t>(d) *
                              static_cast<std::size_t>(n) * sizeof(float),
                          '\0');
      in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
      if (!in) throw FormatError("truncated path file " + file, 1, 1);
      auto [it, inserted] = pool.emplace(payload, corpus.segments.size());
      if (inserted) {
        Matrix seg(d, n);
        const char* bytes = payload.data();
        for (int r = 0; r < d; ++r) {
          for (int c = 0; c < n; ++c) {
            float v;
            std::memcpy(&v, bytes, sizeof(float));
            bytes += sizeof(float);
            seg(r, c) = static_cast<double>(v);
          }
        }
        corpus.segments.push_back(std::move(seg));
      }
      path.segment_ids.push_back(it->second);
    }
    corpus.paths.push_back(std::move(path));
  }
  if (corpus.paths.empty()) throw EmptyDataset(dir + " holds no paths");
  return corpus;
}

}  // namespace noble
