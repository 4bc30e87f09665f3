#include "frain/mixing.hpp"

#include <doctest.h>

#include <random>
#include <stdexcept>

using frain::ScoreWindow;
using frain::StalenessPolicy;

TEST_CASE("ScoreWindow construction and append") {
  CHECK_THROWS_AS(ScoreWindow(0, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(ScoreWindow(4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ScoreWindow(4, 1.0), std::invalid_argument);

  ScoreWindow w(4, 0.2);
  CHECK(w.append(0.9) == 0);
  CHECK(w.at(0) == 0.0);
  CHECK(w.append(0.5) == 1);
  CHECK(w.at(1) == 0.5);
  CHECK_THROWS_AS(w.append(0.1), std::invalid_argument);
  CHECK_THROWS_AS(w.append(1.1), std::invalid_argument);
  CHECK(w.size() == 2);
  CHECK_THROWS_AS(w.at(2), std::out_of_range);
}

TEST_CASE("alpha_brain") {
  const auto w1 = ScoreWindow::from_scores({0, 0.5, 0.5, 0.5, 0.5}, 4, 0.2);
  CHECK(frain::alpha_brain(w1, 4) == doctest::Approx(0.25).epsilon(1e-15));
  const auto w2 = ScoreWindow::from_scores({0, 0.8}, 4, 0.2);
  CHECK(frain::alpha_brain(w2, 1) == 1.0);
  const auto w3 = ScoreWindow::from_scores({0, 0.2, 0.4, 0.6, 0.8}, 4, 0.2);
  CHECK(frain::alpha_brain(w3, 4) == doctest::Approx(0.4).epsilon(1e-15));
  const auto w4 = ScoreWindow::from_scores({0, 0}, 4, 0.2);
  CHECK(frain::alpha_brain(w4, 1) == 0.0);
  CHECK_THROWS_AS(frain::alpha_brain(w3, 0), std::out_of_range);
  CHECK_THROWS_AS(frain::alpha_brain(w3, 5), std::out_of_range);
}

TEST_CASE("alpha_wima") {
  const auto w1 = ScoreWindow::from_scores({0, 0.2, 0.4, 0.6, 0.8}, 4, 0.2);
  CHECK(frain::alpha_wima(w1, 4) == doctest::Approx(0.5).epsilon(1e-15));
  const auto w2 = ScoreWindow::from_scores({0, 0.8}, 4, 0.2);
  CHECK(frain::alpha_wima(w2, 1) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(frain::alpha_wima(w2, 0) == 0.0);
  CHECK_THROWS_AS(frain::alpha_wima(w2, 2), std::out_of_range);
}

TEST_CASE("constant score sequences give exact coefficients") {
  for (std::size_t n : {1u, 2u, 4u, 8u}) {
    for (double c : {0.2, 0.5, 0.75, 1.0}) {
      std::vector<double> s(20, c);
      s[0] = 0.0;
      const auto w = ScoreWindow::from_scores(s, n, 0.2);
      for (std::size_t r = std::max<std::size_t>(n, 1); r < s.size(); ++r) {
        CHECK(frain::alpha_brain(w, r) == doctest::Approx(1.0 / static_cast<double>(n)).epsilon(1e-15));
        CHECK(frain::alpha_wima(w, r) == doctest::Approx(c).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("coefficient range properties on random windows") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> score(0.2, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + trial % 9;
    std::vector<double> s(30);
    for (auto& v : s) v = score(rng);
    s[0] = 0.0;
    const auto w = ScoreWindow::from_scores(s, n, 0.2);
    for (std::size_t r = 1; r < s.size(); ++r) {
      const double b = frain::alpha_brain(w, r);
      CHECK(b >= 0.0);
      CHECK(b <= 1.0);
      if (r >= n) {
        const double m = frain::alpha_wima(w, r);
        CHECK(m >= 0.2);
        CHECK(m <= 1.0);
      }
    }
  }
}

TEST_CASE("staleness_weight") {
  CHECK(frain::staleness_weight(StalenessPolicy::constant(), 100.0) == 1.0);
  CHECK(frain::staleness_weight(StalenessPolicy::polynomial(0.5), 3.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(frain::staleness_weight(StalenessPolicy::hinge(1, 2), 4.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(frain::staleness_weight(StalenessPolicy::hinge(1, 2), 1.0) == 1.0);
  CHECK_THROWS_AS(frain::staleness_weight(StalenessPolicy::constant(), -1.0), std::invalid_argument);
}

TEST_CASE("staleness_weight is 1 at zero and non-increasing") {
  const StalenessPolicy policies[] = {StalenessPolicy::constant(), StalenessPolicy::polynomial(0.5),
                                      StalenessPolicy::polynomial(2.0), StalenessPolicy::hinge(1, 2),
                                      StalenessPolicy::hinge(0.3, 5)};
  for (const auto& p : policies) {
    CHECK(frain::staleness_weight(p, 0.0) == 1.0);
    double prev = 1.0;
    for (double x = 0.0; x <= 50.0; x += 0.25) {
      const double w = frain::staleness_weight(p, x);
      CHECK(w <= prev);
      CHECK(w > 0.0);
      prev = w;
    }
  }
}

TEST_CASE("apply_decay") {
  CHECK(frain::apply_decay(0.5, StalenessPolicy::constant(), 7.0, 3.0) == 0.5);
  CHECK(frain::apply_decay(0.6, StalenessPolicy::polynomial(1.0), 2.0, 1.0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(frain::apply_decay(0.4, StalenessPolicy::hinge(1, 2), 3.0, 3.0) == 0.4);
  CHECK_THROWS_AS(frain::apply_decay(0.4, StalenessPolicy::constant(), 1.0, 2.0), std::invalid_argument);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double alpha = u(rng);
    const double tau = 10 * u(rng);
    const double t = tau + 10 * u(rng);
    CHECK(frain::apply_decay(alpha, StalenessPolicy::hinge(0.5, 1), t, tau) <= alpha);
    CHECK(frain::apply_decay(alpha, StalenessPolicy::polynomial(0.5), t, tau) <= alpha);
  }
}

TEST_CASE("policy validation and parsing") {
  CHECK_THROWS_AS(StalenessPolicy::polynomial(0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(StalenessPolicy::hinge(1.0, 0.0).validate(), std::invalid_argument);
  CHECK(frain::parse_staleness_kind("hinge") == frain::StalenessKind::hinge);
  CHECK(frain::to_string(frain::StalenessKind::polynomial) == "polynomial");
  CHECK_THROWS_AS(frain::parse_staleness_kind("linear"), std::invalid_argument);
}
