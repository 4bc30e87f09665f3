#include "frain/theorem.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace frain {

namespace {

// Uniform on the ball of radius b: Gaussian direction, radius b * U^(1/dim).
void draw_in_ball(std::mt19937_64& rng, double b, std::vector<double>& out) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double n2 = 0.0;
  for (auto& v : out) {
    v = gauss(rng);
    n2 += v * v;
  }
  const double radius = b * std::pow(u(rng), 1.0 / static_cast<double>(out.size()));
  const double scale = n2 > 0.0 ? radius / std::sqrt(n2) : 0.0;
  for (auto& v : out) v *= scale;
}

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

void BoundTrial::validate() const {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw std::invalid_argument("bound trial: T must lie in (0, 1], got " + std::to_string(threshold));
  if (!(norm_bound > 0.0)) throw std::invalid_argument("bound trial: B must be > 0");
  if (window == 0) throw std::invalid_argument("bound trial: N must be >= 1");
  if (dim == 0) throw std::invalid_argument("bound trial: dim must be >= 1");
}

double bound_value(double threshold, double norm_bound, std::size_t r) {
  return 2.0 * norm_bound * (1.0 - std::pow(1.0 - threshold, static_cast<double>(r))) / threshold;
}

std::vector<BoundStep> run_bound_trial(const BoundTrial& trial) {
  trial.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(trial.seed), static_cast<std::uint32_t>(trial.seed >> 32), 0x7E0u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> score_dist(trial.threshold, 1.0);

  const std::size_t n = trial.window;
  // Scores for rounds -(N-1)..horizon so every window is full, as the bound assumes.
  std::vector<double> scores(n - 1 + trial.horizon + 1);
  for (auto& s : scores) s = trial.threshold >= 1.0 ? 1.0 : score_dist(rng);
  auto score_at = [&](std::size_t r, std::size_t back) { return scores[r + n - 1 - back]; };

  std::vector<double> proposal(trial.dim);
  draw_in_ball(rng, trial.norm_bound, proposal);
  std::vector<double> wima = proposal;
  std::vector<double> brain = proposal;

  std::vector<BoundStep> out;
  out.reserve(trial.horizon + 1);
  out.push_back({0.0, 0.0, false, false, l2(brain), l2(wima)});

  std::vector<double> delta(trial.dim);
  for (std::size_t r = 1; r <= trial.horizon; ++r) {
    draw_in_ball(rng, trial.norm_bound, proposal);
    double window_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) window_sum += score_at(r, k);
    const double a_brain = score_at(r, 0) / window_sum;
    const double a_wima = window_sum / static_cast<double>(n);
    for (std::size_t i = 0; i < trial.dim; ++i) {
      wima[i] = (1.0 - a_wima) * wima[i] + a_wima * proposal[i];
      brain[i] = (1.0 - a_brain) * brain[i] + a_brain * proposal[i];
      delta[i] = wima[i] - brain[i];
    }
    BoundStep step;
    step.delta_norm = l2(delta);
    step.bound = bound_value(trial.threshold, trial.norm_bound, r);
    step.violated = step.delta_norm > step.bound + kBoundSlack;
    step.step_violated =
        step.delta_norm > (1.0 - trial.threshold) * out.back().delta_norm + 2.0 * trial.norm_bound + kBoundSlack;
    step.brain_norm = l2(brain);
    step.wima_norm = l2(wima);
    out.push_back(step);
  }
  return out;
}

BoundSummary run_bound_trials(const BoundTrial& base, std::size_t trials) {
  base.validate();
  std::vector<BoundSummary> per(trials);
  const auto count = static_cast<std::ptrdiff_t>(trials);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < count; ++t) {
    BoundTrial trial = base;
    trial.seed = base.seed + static_cast<std::uint64_t>(t);
    const auto steps = run_bound_trial(trial);
    auto& s = per[static_cast<std::size_t>(t)];
    for (std::size_t r = 1; r < steps.size(); ++r) {
      const auto& st = steps[r];
      ++s.steps;
      s.violations += st.violated ? 1 : 0;
      s.step_violations += st.step_violated ? 1 : 0;
      const double limit = base.norm_bound * (1.0 + 1e-12);
      s.norm_violations += (st.brain_norm > limit || st.wima_norm > limit) ? 1 : 0;
      if (st.bound > 0.0) s.max_ratio = std::max(s.max_ratio, st.delta_norm / st.bound);
    }
  }
  BoundSummary total;
  total.trials = trials;
  for (const auto& s : per) {
    total.steps += s.steps;
    total.violations += s.violations;
    total.step_violations += s.step_violations;
    total.norm_violations += s.norm_violations;
    total.max_ratio = std::max(total.max_ratio, s.max_ratio);
  }
  return total;
}

}  // namespace frain
