#pragma once

#include "noble/types.hpp"

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace noble {

/// Position-error statistics plus per-head hit rates and the off-map rate.
/// Mean and median are computed independently; no ordering between them is
/// assumed. `config` is echoed verbatim into metrics.json for provenance.
struct MetricsReport {
  double mean_error_m = 0.0;
  double median_error_m = 0.0;
  std::map<std::string, double> hit_rates;
  double off_map_rate = 0.0;
  std::size_t n_eval = 0;
  std::map<std::string, std::string> config;
};

/// Euclidean distance between predicted and true coordinates, meters.
double position_error(const Point2& pred, const Point2& truth);

/// Aggregates per-sample errors, hit flags and off-map flags. The median
/// uses the lower-middle element for even counts. Throws EmptyEvaluation
/// when `errors` is empty; hit/off-map vectors must match its length.
MetricsReport summarize(std::span<const double> errors,
                        const std::map<std::string, std::vector<bool>>& hits,
                        const std::vector<bool>& off_map,
                        std::map<std::string, std::string> config = {});

/// Stable-key-order JSON:
/// {"mean_m":..,"median_m":..,"hits":{..},"off_map_rate":..,"n":..,"config":{..}}
std::string metrics_to_json(const MetricsReport& report);
void save_metrics(const MetricsReport& report, const std::string& path);

/// Writes true_x,true_y,pred_x,pred_y rows to `csv_path` and an axis-equal
/// SVG quick-look (truths gray, predictions colored) next to it, with the
/// extension swapped to .svg.
void emit_scatter(std::span<const std::pair<Point2, Point2>> true_pred,
                  const std::string& csv_path);

}  // namespace noble
