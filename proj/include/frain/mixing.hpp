#pragma once

// Mixing coefficients derived from the consensus-score history, plus the
// staleness decay that scales them down for late proposals.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace frain {

/// Consensus scores a_0..a_r for accepted rounds. Index r is the accepted
/// round number; a_0 is pinned to 0 and every later entry lies in [T, 1].
class ScoreWindow {
 public:
  ScoreWindow(std::size_t window, double threshold);

  /// Builds a window directly from a score list; used by the theorem harness
  /// and tests, so it only checks that scores are finite and nonnegative.
  static ScoreWindow from_scores(std::vector<double> scores, std::size_t window, double threshold);

  /// Appends the score of the next accepted round. The first append records
  /// round 0 and is stored as 0 regardless of its consensus value.
  std::size_t append(double score);

  std::size_t window() const noexcept { return window_; }
  double threshold() const noexcept { return threshold_; }
  std::size_t size() const noexcept { return scores_.size(); }
  bool empty() const noexcept { return scores_.empty(); }
  std::span<const double> scores() const noexcept { return scores_; }
  double at(std::size_t r) const;

  friend bool operator==(const ScoreWindow&, const ScoreWindow&) = default;

 private:
  std::size_t window_;
  double threshold_;
  std::vector<double> scores_;
};

enum class StalenessKind { constant, polynomial, hinge };

struct StalenessPolicy {
  StalenessKind kind = StalenessKind::constant;
  double a = 0.5;
  double b = 2.0;

  static StalenessPolicy constant();
  static StalenessPolicy polynomial(double a = 0.5);
  static StalenessPolicy hinge(double a = 1.0, double b = 2.0);

  void validate() const;
  friend bool operator==(const StalenessPolicy&, const StalenessPolicy&) = default;
};

std::string to_string(StalenessKind kind);
StalenessKind parse_staleness_kind(const std::string& name);

/// a_r / (sum of the last N scores), or over a_0..a_r while r < N - 1.
double alpha_brain(const ScoreWindow& window, std::size_t r);

/// Mean of a_{max(0, r-N+1)}..a_r.
double alpha_wima(const ScoreWindow& window, std::size_t r);

/// sigma(x): 1, (x+1)^-a, or the hinge 1 / (a(x-b)+1) past b.
double staleness_weight(const StalenessPolicy& policy, double x);

/// alpha * sigma(t - tau). Throws on clock inversion (t < tau).
double apply_decay(double alpha, const StalenessPolicy& policy, double t, double tau);

}  // namespace frain
