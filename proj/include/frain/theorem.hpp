#pragma once

// Empirical check of the WiMA-vs-BRAIN global model difference bound
//   ||Delta_r|| <= 2B (1 - (1-T)^r) / T
// by evolving both update rules on identical random proposals and scores.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace frain {

struct BoundTrial {
  double threshold = 0.2;  // T, scores are drawn from [T, 1]
  double norm_bound = 1.0;  // B
  std::size_t window = 4;   // N
  std::size_t horizon = 200;
  std::size_t dim = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BoundStep {
  double delta_norm = 0.0;
  double bound = 0.0;
  bool violated = false;       // delta_norm > bound + 1e-9
  bool step_violated = false;  // delta_norm > (1-T) * previous + 2B
  double brain_norm = 0.0;
  double wima_norm = 0.0;
};

inline constexpr double kBoundSlack = 1e-9;

/// Closed form 2B (1 - (1-T)^r) / T.
double bound_value(double threshold, double norm_bound, std::size_t r);

/// One trajectory; entry r holds round r (entry 0 is the shared initial model).
std::vector<BoundStep> run_bound_trial(const BoundTrial& trial);

struct BoundSummary {
  std::size_t trials = 0;
  std::size_t steps = 0;
  std::size_t violations = 0;
  std::size_t step_violations = 0;
  std::size_t norm_violations = 0;  // iterate norms exceeding B
  double max_ratio = 0.0;           // max ||Delta_r|| / bound_r over r >= 1
};

/// Runs trials seeded seed, seed+1, ...; trials execute in parallel.
BoundSummary run_bound_trials(const BoundTrial& base, std::size_t trials);

}  // namespace frain
