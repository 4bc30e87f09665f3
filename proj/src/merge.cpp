#include "frain/merge.hpp"

#include "frain/kernels.hpp"

#include <algorithm>
#include <stdexcept>

namespace frain {

std::string to_string(Interpolation i) { return i == Interpolation::lerp ? "lerp" : "slerp"; }
std::string to_string(Coefficient c) { return c == Coefficient::brain ? "brain" : "wima"; }

Interpolation parse_interpolation(const std::string& name) {
  if (name == "lerp") return Interpolation::lerp;
  if (name == "slerp") return Interpolation::slerp;
  throw std::invalid_argument("unknown interpolation '" + name + "' (expected lerp or slerp)");
}

Coefficient parse_coefficient(const std::string& name) {
  if (name == "brain") return Coefficient::brain;
  if (name == "wima") return Coefficient::wima;
  throw std::invalid_argument("unknown coefficient rule '" + name + "' (expected brain or wima)");
}

double merge_coefficient(const MergeMethod& method, const ScoreWindow& window, std::size_t r, double t, double tau) {
  const double raw = method.coefficient == Coefficient::brain ? alpha_brain(window, r) : alpha_wima(window, r);
  return std::clamp(apply_decay(raw, method.decay, t, tau), 0.0, 1.0);
}

MergeOutcome merge_step_traced(const MergeMethod& method, const ParamVec& global_prev, const ParamVec& proposal,
                               const ScoreWindow& window, std::size_t r, double t, double tau) {
  if (global_prev.dim() != proposal.dim()) throw DimensionMismatch(global_prev.dim(), proposal.dim(), "merge_step");
  if (r >= window.size())
    throw std::out_of_range("merge_step: no score recorded for round " + std::to_string(r));
  if (r == 0) return {proposal, 1.0, SlerpPath::spherical};

  const double alpha = merge_coefficient(method, window, r, t, tau);
  if (method.interpolation == Interpolation::lerp) return {lerp(global_prev, proposal, alpha), alpha, SlerpPath::spherical};
  auto s = slerp_traced(global_prev, proposal, alpha);
  return {std::move(s.value), alpha, s.path};
}

ParamVec merge_step(const MergeMethod& method, const ParamVec& global_prev, const ParamVec& proposal,
                    const ScoreWindow& window, std::size_t r, double t, double tau) {
  return merge_step_traced(method, global_prev, proposal, window, r, t, tau).model;
}

ParamVec fast_sync(const ParamVec& m_prev, const ParamVec& m_last, double alpha_prev, double alpha_last) {
  if (m_prev.dim() != m_last.dim()) throw DimensionMismatch(m_prev.dim(), m_last.dim(), "fast_sync");
  if (alpha_prev < 0.0 || alpha_last < 0.0) throw std::invalid_argument("fast_sync: coefficients must be >= 0");
  const double total = alpha_prev + alpha_last;
  if (!(total > 0.0)) throw std::invalid_argument("fast_sync: both coefficients are zero");
  std::vector<double> out(m_prev.dim());
  kernels::combine(alpha_prev / total, m_prev.values(), alpha_last / total, m_last.values(), out);
  return ParamVec(std::move(out));
}

ParamVec replay_global(const MergeMethod& method, const ParamVec& initial, std::span<const ParamVec> proposals,
                       const ScoreWindow& window, std::span<const double> enqueue_times,
                       std::span<const double> merge_times) {
  if (proposals.size() != window.size() || proposals.size() != enqueue_times.size() ||
      proposals.size() != merge_times.size())
    throw std::invalid_argument("replay_global: length mismatch (proposals " + std::to_string(proposals.size()) +
                                ", scores " + std::to_string(window.size()) + ", enqueue times " +
                                std::to_string(enqueue_times.size()) + ", merge times " +
                                std::to_string(merge_times.size()) + ")");
  ParamVec global = initial;
  for (std::size_t r = 0; r < proposals.size(); ++r)
    global = merge_step(method, global, proposals[r], window, r, merge_times[r], enqueue_times[r]);
  return global;
}

ParamVec replay_global(const MergeMethod& method, const ParamVec& initial, std::span<const ParamVec> proposals,
                       const ScoreWindow& window, std::span<const double> enqueue_times, double eval_time) {
  const std::vector<double> merge_times(enqueue_times.size(), eval_time);
  return replay_global(method, initial, proposals, window, enqueue_times, merge_times);
}

ParamVec fedavg_aggregate(std::span<const ParamVec> models, std::span<const std::uint64_t> sample_counts) {
  if (models.empty()) throw std::invalid_argument("fedavg_aggregate: no models");
  if (models.size() != sample_counts.size())
    throw std::invalid_argument("fedavg_aggregate: " + std::to_string(models.size()) + " models but " +
                                std::to_string(sample_counts.size()) + " sample counts");
  double total = 0.0;
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (sample_counts[k] == 0) throw std::invalid_argument("fedavg_aggregate: sample counts must be >= 1");
    if (models[k].dim() != models[0].dim()) throw DimensionMismatch(models[0].dim(), models[k].dim(), "fedavg_aggregate");
    total += static_cast<double>(sample_counts[k]);
  }
  // Identical inputs come back bit-exact.
  if (std::all_of(models.begin(), models.end(), [&](const ParamVec& m) { return m == models[0]; })) return models[0];

  std::vector<double> out(models[0].dim(), 0.0);
  for (std::size_t k = 0; k < models.size(); ++k)
    kernels::axpy(static_cast<double>(sample_counts[k]) / total, models[k].values(), out);
  return ParamVec(std::move(out));
}

ParamVec fedasync_update(const ParamVec& global_prev, const ParamVec& local, double alpha,
                         const StalenessPolicy& policy, double t, double tau) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::out_of_range("fedasync_update: alpha must lie in [0, 1]");
  return lerp(global_prev, local, apply_decay(alpha, policy, t, tau));
}

}  // namespace frain
