#include "noble/metrics.hpp"

#include "noble/error.hpp"
#include "noble/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace noble {

double position_error(const Point2& pred, const Point2& truth) {
  return distance(pred, truth);
}

MetricsReport summarize(std::span<const double> errors,
                        const std::map<std::string, std::vector<bool>>& hits,
                        const std::vector<bool>& off_map,
                        std::map<std::string, std::string> config) {
  if (errors.empty()) throw EmptyEvaluation("no samples to summarize");
  for (const auto& [head, flags] : hits) {
    if (flags.size() != errors.size())
      throw EmptyEvaluation("hit vector for head '" + head +
                            "' does not match sample count");
  }
  if (!off_map.empty() && off_map.size() != errors.size())
    throw EmptyEvaluation("off-map vector does not match sample count");

  MetricsReport report;
  report.n_eval = errors.size();
  report.config = std::move(config);

  double sum = 0.0;
  for (double e : errors) sum += e;
  report.mean_error_m = sum / static_cast<double>(errors.size());

  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  report.median_error_m = sorted[(sorted.size() - 1) / 2];  // lower-middle

  for (const auto& [head, flags] : hits) {
    std::size_t n_hit = 0;
    for (bool hit : flags) n_hit += hit ? 1 : 0;
    report.hit_rates[head] =
        static_cast<double>(n_hit) / static_cast<double>(flags.size());
  }

  if (!off_map.empty()) {
    std::size_t n_off = 0;
    for (bool off : off_map) n_off += off ? 1 : 0;
    report.off_map_rate =
        static_cast<double>(n_off) / static_cast<double>(off_map.size());
  }
  return report;
}

std::string metrics_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["mean_m"] = report.mean_error_m;
  j["median_m"] = report.median_error_m;
  nlohmann::ordered_json hits = nlohmann::ordered_json::object();
  for (const auto& [head, rate] : report.hit_rates) hits[head] = rate;
  j["hits"] = hits;
  j["off_map_rate"] = report.off_map_rate;
  j["n"] = report.n_eval;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.config) config[key] = value;
  j["config"] = config;
  return j.dump(2) + "\n";
}

void save_metrics(const MetricsReport& report, const std::string& path) {
  atomic_write_file(path, metrics_to_json(report));
}

namespace {

std::string svg_path_for(const std::string& csv_path) {
  auto dot = csv_path.find_last_of('.');
  auto slash = csv_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return csv_path + ".svg";
  return csv_path.substr(0, dot) + ".svg";
}

std::string scatter_svg(std::span<const std::pair<Point2, Point2>> rows) {
  double min_x = 0.0, min_y = 0.0, max_x = 1.0, max_y = 1.0;
  bool first = true;
  for (const auto& [truth, pred] : rows) {
    for (const Point2& p : {truth, pred}) {
      if (first) {
        min_x = max_x = p.x;
        min_y = max_y = p.y;
        first = false;
      } else {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
      }
    }
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
  const double pad = 0.03 * span;
  const double scale = 640.0 / (span + 2 * pad);  // axis-equal
  const double radius = 2.0;

  auto sx = [&](double x) { return (x - min_x + pad) * scale; };
  // SVG y grows downward; flip so the plot reads like a map.
  auto sy = [&](double y) { return (max_y - y + pad) * scale; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << format_double((max_x - min_x + 2 * pad) * scale) << "\" height=\""
      << format_double((max_y - min_y + 2 * pad) * scale) << "\">\n";
  out << "<g fill=\"#b0b0b0\" fill-opacity=\"0.6\">\n";
  for (const auto& [truth, pred] : rows) {
    (void)pred;
    out << "<circle cx=\"" << format_double(sx(truth.x)) << "\" cy=\""
        << format_double(sy(truth.y)) << "\" r=\"" << radius << "\"/>\n";
  }
  out << "</g>\n<g fill=\"#d03030\" fill-opacity=\"0.6\">\n";
  for (const auto& [truth, pred] : rows) {
    (void)truth;
    out << "<circle cx=\"" << format_double(sx(pred.x)) << "\" cy=\""
        << format_double(sy(pred.y)) << "\" r=\"" << radius << "\"/>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace

void emit_scatter(std::span<const std::pair<Point2, Point2>> true_pred,
                  const std::string& csv_path) {
  std::ostringstream csv;
  csv << "true_x,true_y,pred_x,pred_y\n";
  for (const auto& [truth, pred] : true_pred) {
    csv << format_double(truth.x) << ',' << format_double(truth.y) << ','
        << format_double(pred.x) << ',' << format_double(pred.y) << '\n';
  }
  atomic_write_file(csv_path, csv.str());
  atomic_write_file(svg_path_for(csv_path), scatter_svg(true_pred));
}

}  // namespace noble
