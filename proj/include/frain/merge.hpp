#pragma once

// Global-model construction rules: the score-weighted merge step, FastSync
// approximation, full sequential replay, and the FedAvg / FedAsync baselines.

#include "frain/mixing.hpp"
#include "frain/param_vec.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace frain {

enum class Interpolation { lerp, slerp };
enum class Coefficient { brain, wima };

std::string to_string(Interpolation i);
std::string to_string(Coefficient c);
Interpolation parse_interpolation(const std::string& name);
Coefficient parse_coefficient(const std::string& name);

struct MergeMethod {
  Interpolation interpolation = Interpolation::slerp;
  Coefficient coefficient = Coefficient::wima;
  StalenessPolicy decay = StalenessPolicy::constant();

  static MergeMethod frain() { return {Interpolation::slerp, Coefficient::wima, StalenessPolicy::constant()}; }
  static MergeMethod brain() { return {Interpolation::lerp, Coefficient::brain, StalenessPolicy::constant()}; }

  friend bool operator==(const MergeMethod&, const MergeMethod&) = default;
};

struct MergeOutcome {
  ParamVec model;
  double alpha = 1.0;  // decayed coefficient actually applied (1 for round 0)
  SlerpPath path = SlerpPath::spherical;
};

/// Decayed mixing coefficient for round r >= 1.
double merge_coefficient(const MergeMethod& method, const ScoreWindow& window, std::size_t r, double t, double tau);

/// One merge of proposal into global_prev at round r. Round 0 returns the
/// proposal itself; later rounds interpolate by the decayed coefficient.
ParamVec merge_step(const MergeMethod& method, const ParamVec& global_prev, const ParamVec& proposal,
                    const ScoreWindow& window, std::size_t r, double t, double tau);
MergeOutcome merge_step_traced(const MergeMethod& method, const ParamVec& global_prev, const ParamVec& proposal,
                               const ScoreWindow& window, std::size_t r, double t, double tau);

/// Pseudo-global model from the two latest proposals, weighted by their coefficients.
ParamVec fast_sync(const ParamVec& m_prev, const ParamVec& m_last, double alpha_prev, double alpha_last);

/// Folds merge_step over proposals 0..n-1 starting from initial. Each round
/// decays against its own merge time.
ParamVec replay_global(const MergeMethod& method, const ParamVec& initial, std::span<const ParamVec> proposals,
                       const ScoreWindow& window, std::span<const double> enqueue_times,
                       std::span<const double> merge_times);

/// Same fold with every round merged at eval_time.
ParamVec replay_global(const MergeMethod& method, const ParamVec& initial, std::span<const ParamVec> proposals,
                       const ScoreWindow& window, std::span<const double> enqueue_times, double eval_time);

/// Sample-count weighted average.
ParamVec fedavg_aggregate(std::span<const ParamVec> models, std::span<const std::uint64_t> sample_counts);

/// lerp(global_prev, local, alpha * sigma(t - tau)).
ParamVec fedasync_update(const ParamVec& global_prev, const ParamVec& local, double alpha,
                         const StalenessPolicy& policy, double t, double tau);

}  // namespace frain
