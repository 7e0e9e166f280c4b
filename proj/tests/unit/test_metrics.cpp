#include <doctest.h>

#include "noble/error.hpp"
#include "noble/io_util.hpp"
#include "noble/metrics.hpp"

#include "test_util.hpp"

#include <algorithm>
#include <random>

using namespace noble;

TEST_CASE("position error is the Euclidean distance") {
  CHECK(position_error({0, 3}, {4, 0}) == doctest::Approx(5.0));
  CHECK(position_error({1.5, -2}, {1.5, -2}) == doctest::Approx(0.0));
  CHECK(position_error({1, 2}, {5, 7}) ==
        doctest::Approx(position_error({5, 7}, {1, 2})));
}

TEST_CASE("summarize uses the lower-middle median") {
  const std::vector<double> errors{1, 2, 3, 4};
  const MetricsReport report = summarize(errors, {}, {});
  CHECK(report.mean_error_m == doctest::Approx(2.5));
  CHECK(report.median_error_m == doctest::Approx(2.0));
  CHECK(report.n_eval == 4);
}

TEST_CASE("summarize rates") {
  const std::vector<double> errors{1, 1, 1};
  std::map<std::string, std::vector<bool>> hits;
  hits["building"] = {true, true, true};
  hits["floor"] = {true, false, false};
  const std::vector<bool> off_map{false, false, true};
  const MetricsReport report = summarize(errors, hits, off_map);
  CHECK(report.hit_rates.at("building") == doctest::Approx(1.0));
  CHECK(report.hit_rates.at("floor") == doctest::Approx(1.0 / 3.0));
  CHECK(report.off_map_rate == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("summarize is order invariant") {
  std::mt19937_64 rng(5);
  std::vector<double> errors;
  for (int i = 0; i < 101; ++i)
    errors.push_back(std::uniform_real_distribution<double>(0, 30)(rng));
  const MetricsReport a = summarize(errors, {}, {});
  std::shuffle(errors.begin(), errors.end(), rng);
  const MetricsReport b = summarize(errors, {}, {});
  CHECK(a.mean_error_m == doctest::Approx(b.mean_error_m).epsilon(1e-12));
  CHECK(a.median_error_m == b.median_error_m);
}

TEST_CASE("summarize rejects empty input") {
  CHECK_THROWS_AS(summarize({}, {}, {}), EmptyEvaluation);
}

TEST_CASE("metrics json has the stable schema") {
  MetricsReport report;
  report.mean_error_m = 1.5;
  report.median_error_m = 1.0;
  report.hit_rates["fine"] = 0.5;
  report.off_map_rate = 0.0;
  report.n_eval = 10;
  report.config["tau"] = "0.2";
  const std::string json = metrics_to_json(report);
  CHECK(json.find("\"mean_m\"") < json.find("\"median_m\""));
  CHECK(json.find("\"median_m\"") < json.find("\"hits\""));
  CHECK(json.find("\"hits\"") < json.find("\"off_map_rate\""));
  CHECK(json.find("\"off_map_rate\"") < json.find("\"n\""));
  CHECK(json.find("\"config\"") != std::string::npos);

  // Byte-identical across repeated serialization.
  CHECK(metrics_to_json(report) == json);
}

TEST_CASE("emit_scatter writes csv rows and a well-formed svg") {
  noble::testing::ScratchDir dir("scatter");
  const std::vector<std::pair<Point2, Point2>> rows{
      {{0, 0}, {1, 1}},
      {{2, 3}, {2.5, 3.5}},
  };
  const std::string csv_path = dir.file("scatter.csv");
  emit_scatter(rows, csv_path);

  const std::string csv = read_file(csv_path);
  CHECK(csv.rfind("true_x,true_y,pred_x,pred_y\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 rows

  const std::string svg = read_file(dir.file("scatter.svg"));
  CHECK(svg.find("<?xml") == 0);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
  // 4 circles: two truths, two predictions.
  std::size_t circles = 0, at = 0;
  while ((at = svg.find("<circle", at)) != std::string::npos) {
    ++circles;
    ++at;
  }
  CHECK(circles == 4);
}
