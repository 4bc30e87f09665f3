#pragma once

// Metrics emission: the per-evaluation CSV and the per-run summary JSON.
//
// CSV columns, in order:
//   seed, algorithm, sim_time, gradient_updates, round, accuracy, loss,
//   score, alpha, staleness, status
// Optional columns are left empty when not applicable (for example alpha at
// round 0 or accuracy on the quadratic task).

#include "frain/sim.hpp"

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace frain {

inline constexpr const char* kMetricsHeader =
    "seed,algorithm,sim_time,gradient_updates,round,accuracy,loss,score,alpha,staleness,status";

void write_metrics_csv(std::ostream& out, std::span<const RunResult> runs, bool header = true);

struct GroupStats {
  std::string algorithm;
  std::size_t runs = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run
};

double mean_of(std::span<const double> values);
double stddev_of(std::span<const double> values);

/// Final accuracy (or final loss when accuracy is absent) grouped by algorithm label, in first-seen order.
std::vector<GroupStats> summarize(std::span<const RunResult> runs);

nlohmann::json summary_json(std::span<const RunResult> runs);

}  // namespace frain
