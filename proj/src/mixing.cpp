#include "frain/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace frain {

namespace {

void require_round(const ScoreWindow& w, std::size_t r, const char* where) {
  if (r >= w.size())
    throw std::out_of_range(std::string(where) + ": round " + std::to_string(r) + " has no score (window holds " +
                            std::to_string(w.size()) + ")");
}

}  // namespace

ScoreWindow::ScoreWindow(std::size_t window, double threshold) : window_(window), threshold_(threshold) {
  if (window == 0) throw std::invalid_argument("ScoreWindow: window N must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("ScoreWindow: threshold T must lie in (0, 1), got " + std::to_string(threshold));
}

ScoreWindow ScoreWindow::from_scores(std::vector<double> scores, std::size_t window, double threshold) {
  if (window == 0) throw std::invalid_argument("ScoreWindow: window N must be >= 1");
  ScoreWindow w(window, 0.5);
  w.threshold_ = threshold;
  for (double s : scores)
    if (!std::isfinite(s) || s < 0.0) throw std::invalid_argument("ScoreWindow: scores must be finite and >= 0");
  w.scores_ = std::move(scores);
  return w;
}

std::size_t ScoreWindow::append(double score) {
  if (scores_.empty()) {
    scores_.push_back(0.0);
    return 0;
  }
  if (!(score >= threshold_ && score <= 1.0))
    throw std::invalid_argument("ScoreWindow: accepted score " + std::to_string(score) + " outside [T, 1]");
  scores_.push_back(score);
  return scores_.size() - 1;
}

double ScoreWindow::at(std::size_t r) const {
  require_round(*this, r, "ScoreWindow::at");
  return scores_[r];
}

StalenessPolicy StalenessPolicy::constant() { return {StalenessKind::constant, 0.5, 2.0}; }
StalenessPolicy StalenessPolicy::polynomial(double a) { return {StalenessKind::polynomial, a, 2.0}; }
StalenessPolicy StalenessPolicy::hinge(double a, double b) { return {StalenessKind::hinge, a, b}; }

void StalenessPolicy::validate() const {
  if (kind != StalenessKind::constant && !(a > 0.0))
    throw std::invalid_argument("staleness policy: a must be > 0");
  if (kind == StalenessKind::hinge && !(b > 0.0)) throw std::invalid_argument("staleness policy: b must be > 0");
}

std::string to_string(StalenessKind kind) {
  switch (kind) {
    case StalenessKind::constant: return "constant";
    case StalenessKind::polynomial: return "polynomial";
    case StalenessKind::hinge: return "hinge";
  }
  return "unknown";
}

StalenessKind parse_staleness_kind(const std::string& name) {
  if (name == "constant") return StalenessKind::constant;
  if (name == "polynomial") return StalenessKind::polynomial;
  if (name == "hinge") return StalenessKind::hinge;
  throw std::invalid_argument("unknown staleness policy '" + name + "' (expected constant, polynomial or hinge)");
}

double alpha_brain(const ScoreWindow& window, std::size_t r) {
  if (r == 0) throw std::out_of_range("alpha_brain: round must be >= 1");
  require_round(window, r, "alpha_brain");
  const std::size_t n = window.window();
  const std::size_t first = r + 1 >= n ? r + 1 - n : 0;
  double denom = 0.0;
  for (std::size_t k = first; k <= r; ++k) denom += window.at(k);
  const double ar = window.at(r);
  if (denom == 0.0) return 0.0;
  return ar / denom;
}

double alpha_wima(const ScoreWindow& window, std::size_t r) {
  require_round(window, r, "alpha_wima");
  const std::size_t count = std::min(window.window(), r + 1);
  double sum = 0.0;
  for (std::size_t k = r + 1 - count; k <= r; ++k) sum += window.at(k);
  return sum / static_cast<double>(count);
}

double staleness_weight(const StalenessPolicy& policy, double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("staleness_weight: staleness must be >= 0, got " + std::to_string(x));
  switch (policy.kind) {
    case StalenessKind::constant: return 1.0;
    case StalenessKind::polynomial: return std::pow(x + 1.0, -policy.a);
    case StalenessKind::hinge: return x <= policy.b ? 1.0 : 1.0 / (policy.a * (x - policy.b) + 1.0);
  }
  return 1.0;
}

double apply_decay(double alpha, const StalenessPolicy& policy, double t, double tau) {
  if (t < tau)
    throw std::invalid_argument("apply_decay: clock inversion (t=" + std::to_string(t) + " < tau=" +
                                std::to_string(tau) + ")");
  return alpha * staleness_weight(policy, t - tau);
}

}  // namespace frain
