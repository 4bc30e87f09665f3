#include "frain/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>

namespace frain {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <class T>
std::string opt(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>)
    return fmt(*v);
  else
    return std::to_string(*v);
}

double final_metric(const RunResult& r) {
  const double acc = r.final_accuracy();
  return std::isnan(acc) ? r.final_loss() : acc;
}

std::string final_metric_name(const RunResult& r) { return std::isnan(r.final_accuracy()) ? "loss" : "accuracy"; }

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const RunResult> runs, bool header) {
  if (header) out << kMetricsHeader << '\n';
  for (const auto& run : runs) {
    for (const auto& row : run.rows) {
      out << row.seed << ',' << row.algorithm << ',' << fmt(row.sim_time) << ',' << row.gradient_updates << ','
          << opt(row.round) << ',' << opt(row.accuracy) << ',' << fmt(row.loss) << ',' << opt(row.score) << ','
          << opt(row.alpha) << ',' << opt(row.staleness) << ',' << row.status << '\n';
    }
  }
}

double mean_of(std::span<const double> values) {
  if (values.empty()) return std::nan("");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double stddev_of(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean_of(values);
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(values.size() - 1));
}

std::vector<GroupStats> summarize(std::span<const RunResult> runs) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> groups;
  for (const auto& r : runs) {
    if (r.rows.empty()) continue;
    const auto& label = r.rows.front().algorithm;
    if (!groups.count(label)) order.push_back(label);
    groups[label].push_back(final_metric(r));
  }
  std::vector<GroupStats> out;
  for (const auto& label : order) {
    const auto& v = groups[label];
    out.push_back({label, v.size(), mean_of(v), stddev_of(v)});
  }
  return out;
}

nlohmann::json summary_json(std::span<const RunResult> runs) {
  nlohmann::json doc;
  doc["runs"] = nlohmann::json::array();
  for (const auto& r : runs) {
    if (r.rows.empty()) continue;
    doc["runs"].push_back({{"seed", r.rows.front().seed},
                           {"algorithm", r.rows.front().algorithm},
                           {"metric", final_metric_name(r)},
                           {"final", final_metric(r)},
                           {"final_loss", r.final_loss()},
                           {"gradient_updates", r.gradient_updates},
                           {"accepted", r.accepted},
                           {"rejected", r.rejected},
                           {"consistency_failures", r.consistency_failures},
                           {"max_fastsync_gap", r.max_fastsync_gap}});
  }
  doc["groups"] = nlohmann::json::array();
  for (const auto& g : summarize(runs))
    doc["groups"].push_back({{"algorithm", g.algorithm}, {"runs", g.runs}, {"mean", g.mean}, {"std", g.stddev}});
  return doc;
}

}  // namespace frain
