#include "frain/theorem.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace frain;

TEST_CASE("bound_value closed form") {
  CHECK(bound_value(0.2, 1.0, 0) == 0.0);
  CHECK(bound_value(0.2, 1.0, 1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(bound_value(0.7, 3.0, 1) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(bound_value(0.5, 1.0, 2) == doctest::Approx(3.0).epsilon(1e-15));

  for (double t : {0.2, 0.5, 0.9}) {
    double prev = 0.0;
    for (std::size_t r = 0; r < 300; ++r) {
      const double b = bound_value(t, 1.0, r);
      CHECK(b >= prev);
      prev = b;
    }
    const auto r_conv = static_cast<std::size_t>(std::ceil(std::log(1e-6) / std::log(1.0 - t)));
    CHECK(std::abs(bound_value(t, 1.0, r_conv) - 2.0 / t) <= 1e-6 * (2.0 / t) * (1.0 + 1e-9));
  }
  CHECK(bound_value(0.2, 1.0, 10'000) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("trial starts from a shared model") {
  BoundTrial t;
  t.horizon = 20;
  const auto steps = run_bound_trial(t);
  REQUIRE(steps.size() == 21);
  CHECK(steps[0].delta_norm == 0.0);
  CHECK(steps[0].bound == 0.0);
  CHECK_FALSE(steps[0].violated);
}

TEST_CASE("trials are reproducible") {
  BoundTrial t;
  t.seed = 42;
  t.horizon = 30;
  const auto a = run_bound_trial(t);
  const auto b = run_bound_trial(t);
  for (std::size_t r = 0; r < a.size(); ++r) CHECK(a[r].delta_norm == b[r].delta_norm);
}

TEST_CASE("unit threshold with a single-slot window makes both rules copy the proposal") {
  BoundTrial t;
  t.threshold = 1.0;
  t.window = 1;
  t.horizon = 50;
  for (const auto& s : run_bound_trial(t)) CHECK(s.delta_norm == 0.0);

  t.window = 4;  // WiMA still copies, BRAIN moves by 1/N, and the bound 2B still holds
  for (const auto& s : run_bound_trial(t)) CHECK_FALSE(s.violated);
}

TEST_CASE("no bound, step or norm violations") {
  for (double threshold : {0.2, 0.5}) {
    for (std::size_t window : {1u, 4u, 8u}) {
      BoundTrial t;
      t.threshold = threshold;
      t.window = window;
      t.seed = 1000 * window;
      const auto s = run_bound_trials(t, 200);
      CAPTURE(threshold);
      CAPTURE(window);
      CHECK(s.steps == 200 * t.horizon);
      CHECK(s.violations == 0);
      CHECK(s.step_violations == 0);
      CHECK(s.norm_violations == 0);
      CHECK(s.max_ratio <= 1.0);
      CHECK(s.max_ratio > 0.0);
    }
  }
}

TEST_CASE("validation") {
  BoundTrial t;
  t.threshold = 0.0;
  CHECK_THROWS_AS(run_bound_trial(t), std::invalid_argument);
  t.threshold = 1.2;
  CHECK_THROWS_AS(run_bound_trial(t), std::invalid_argument);
  t = BoundTrial{};
  t.norm_bound = 0.0;
  CHECK_THROWS_AS(run_bound_trial(t), std::invalid_argument);
  t = BoundTrial{};
  t.window = 0;
  CHECK_THROWS_AS(run_bound_trials(t, 3), std::invalid_argument);
}
