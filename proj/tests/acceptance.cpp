// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
// Exit status is nonzero when any criterion fails.

#include "frain/chain.hpp"
#include "frain/config.hpp"
#include "frain/param_vec.hpp"
#include "frain/report.hpp"
#include "frain/sim.hpp"
#include "frain/theorem.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace frain;

namespace {

constexpr std::size_t kSeeds = 10;
constexpr std::uint64_t kMasterSeed = 2025;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!") + what;
  }
};

std::string num(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

int failures = 0;
std::size_t chain_runs = 0;
std::size_t chain_consistency_failures = 0;

void report(int id, const std::string& title, const std::function<Verdict()>& body, double limit_seconds = 0.0) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v = body();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_seconds > 0.0) v.require(secs < limit_seconds, "runtime " + num(secs, 1) + "s < " + num(limit_seconds, 0) + "s");
  if (!v.pass) ++failures;
  std::printf("[%s] %2d %s (%.1fs): %s\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), secs, v.detail.c_str());
  std::fflush(stdout);
}

SimConfig base_config() {
  SimConfig c;
  c.seed = kMasterSeed;
  return c;
}

std::vector<RunResult> repeats(const SimConfig& c) {
  auto runs = run_repeats(c, kSeeds);
  if (c.algorithm == Algorithm::brain || c.algorithm == Algorithm::frain) {
    for (const auto& r : runs) {
      ++chain_runs;
      chain_consistency_failures += r.consistency_failures;
    }
  }
  return runs;
}

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
};

Stats final_accuracy(const std::vector<RunResult>& runs) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(r.final_accuracy());
  return {mean_of(v), stddev_of(v)};
}

std::map<std::string, Stats> run_preset(const std::string& preset) {
  std::map<std::string, Stats> out;
  for (const auto& c : ablation_matrix(preset, base_config())) out[c.label] = final_accuracy(repeats(c));
  return out;
}

// ---------------------------------------------------------------------------

Verdict slerp_oracle() {
  Verdict v;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t dim : {std::size_t{2}, std::size_t{10}, std::size_t{10'000}}) {
    double worst = 0.0;
    for (int i = 0; i < 10'000; ++i) {
      const auto a = oracle::gaussian(rng, dim);
      const auto b = oracle::gaussian(rng, dim);
      const double alpha = u(rng);
      const auto got = slerp(ParamVec(a), ParamVec(b), alpha);
      const auto want = oracle::slerp_ld(a, b, alpha);
      for (std::size_t k = 0; k < dim; ++k)
        worst = std::max(worst, static_cast<double>(std::fabs(static_cast<long double>(got[k]) - want[k])));
    }
    v.require(worst <= 1e-9, "dim " + std::to_string(dim) + " max|err| " + sci(worst) + " <= 1e-9");
  }
  return v;
}

Verdict norm_contrast() {
  Verdict v;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t dim = 2 + i % 63;
    const auto a = oracle::unit(oracle::gaussian(rng, dim));
    const auto b = oracle::unit(oracle::gaussian(rng, dim));
    worst = std::max(worst, std::abs(norm(slerp(ParamVec(a), ParamVec(b), u(rng))) - 1.0));
  }
  v.require(worst <= 1e-6, "unit pairs max|norm-1| " + sci(worst));

  const double theta = 150.0 * std::numbers::pi / 180.0;
  const ParamVec a{1.0, 0.0};
  const ParamVec b{std::cos(theta), std::sin(theta)};
  const double l = norm(lerp(a, b, 0.5));
  const double s = norm(slerp(a, b, 0.5));
  const double cos75 = std::cos(75.0 * std::numbers::pi / 180.0);
  v.require(std::abs(l - cos75) <= 1e-6, "lerp midpoint norm " + num(l, 6) + " vs cos75 " + num(cos75, 6));
  v.require(std::abs(s - 1.0) <= 1e-6, "slerp midpoint norm " + num(s, 6));
  return v;
}

Verdict theorem_bound() {
  Verdict v;
  for (std::size_t n : {1u, 4u, 8u}) {
    BoundTrial t;
    t.threshold = 0.2;
    t.norm_bound = 1.0;
    t.window = n;
    t.horizon = 200;
    t.seed = 7000 + n;
    const auto s = run_bound_trials(t, 1000);
    v.require(s.violations == 0 && s.step_violations == 0 && s.steps == 200'000,
              "N=" + std::to_string(n) + " violations " + std::to_string(s.violations) + ", step " +
                  std::to_string(s.step_violations) + ", max ratio " + num(s.max_ratio));
  }
  return v;
}

Verdict convergence() {
  Verdict v;
  auto sgd = base_config();
  sgd.algorithm = Algorithm::sgd;
  const auto ref = final_accuracy(repeats(sgd));
  v.require(ref.mean >= 0.95, "sgd " + num(ref.mean));
  for (auto a : {Algorithm::fedavg, Algorithm::fedasync, Algorithm::brain, Algorithm::frain}) {
    auto c = base_config();
    c.algorithm = a;
    const auto s = final_accuracy(repeats(c));
    v.require(std::abs(s.mean - ref.mean) <= 0.05, to_string(a) + " " + num(s.mean));
  }
  return v;
}

Verdict byzantine() {
  Verdict v;
  const auto m = run_preset("byzantine");
  const double chance = 1.0 / static_cast<double>(base_config().task.classes);
  const double clean = m.at("frain:clean").mean;
  for (const std::string adv : {"randomizers=10", "nullifiers=10"}) {
    const double fedavg = m.at("fedavg:" + adv).mean;
    const double fedasync = m.at("fedasync:" + adv).mean;
    const double brain = m.at("brain:" + adv).mean;
    const double fr = m.at("frain:" + adv).mean;
    v.require(fedavg <= chance + 0.15, adv + " fedavg " + num(fedavg) + " <= " + num(chance + 0.15));
    v.require(fedasync <= chance + 0.15, adv + " fedasync " + num(fedasync) + " <= " + num(chance + 0.15));
    v.require(fr >= 0.9 * clean, adv + " frain " + num(fr) + " >= 0.9*clean " + num(0.9 * clean));
    v.require(fr >= brain - 0.02, adv + " frain " + num(fr) + " >= brain-0.02 " + num(brain - 0.02));
  }
  return v;
}

Verdict fastsync() {
  Verdict v;
  const auto m = run_preset("fastsync");
  for (const std::string split : {"iid", "non-iid"}) {
    const double ref = m.at("frain:fastsync=0:" + split).mean;
    for (int k : {7, 11, 21}) {
      const double x = m.at("frain:fastsync=" + std::to_string(k) + ":" + split).mean;
      v.require(std::abs(x - ref) <= 0.05, split + " k=" + std::to_string(k) + " " + num(x) + " vs " + num(ref));
    }
  }
  return v;
}

Verdict slerp_vs_lerp() {
  Verdict v;
  const auto m = run_preset("slerp_vs_lerp");
  const auto s = m.at("frain:slerp");
  const auto l = m.at("frain:lerp");
  v.require(s.mean >= l.mean, "mean slerp " + num(s.mean) + " >= lerp " + num(l.mean));
  v.require(s.stddev <= l.stddev, "std slerp " + num(s.stddev) + " <= lerp " + num(l.stddev));
  return v;
}

Verdict staleness_order() {
  Verdict v;
  const auto m = run_preset("staleness");
  const double h = m.at("frain:hinge").mean;
  const double p = m.at("frain:polynomial").mean;
  const double c = m.at("frain:constant").mean;
  v.require(h >= p - 0.02, "hinge " + num(h) + " >= polynomial " + num(p) + " - 0.02");
  v.require(p >= c - 0.02, "polynomial " + num(p) + " >= constant " + num(c) + " - 0.02");
  return v;
}

Verdict determinism() {
  Verdict v;
  for (auto a : {Algorithm::sgd, Algorithm::fedavg, Algorithm::fedasync, Algorithm::brain, Algorithm::frain}) {
    auto c = base_config();
    c.algorithm = a;
    c.iid = false;
    if (a != Algorithm::sgd) c.randomizers = 5;
    c.fastsync_nodes = 7;
    std::ostringstream x, y;
    const std::vector<RunResult> first{run_experiment(c)};
    const std::vector<RunResult> second{run_experiment(c)};
    write_metrics_csv(x, first);
    write_metrics_csv(y, second);
    v.require(x.str() == y.str(), to_string(a) + " csv identical");
    if (a == Algorithm::brain || a == Algorithm::frain) {
      ++chain_runs;
      chain_consistency_failures += first[0].consistency_failures;
    }
  }
  v.require(chain_consistency_failures == 0, std::to_string(chain_runs) + " chain runs, " +
                                                 std::to_string(chain_consistency_failures) +
                                                 " digest disagreements");
  return v;
}

Verdict commit_reveal() {
  Verdict v;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> byte(0, 255);

  std::size_t tampered = 0, caught = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    ContractConfig cc;
    cc.rng_seed = static_cast<std::uint64_t>(trial);
    Contract c(cc);
    ContentStore store;
    const auto id = c.submit_proposal(store, store.put(ParamVec{static_cast<double>(trial)}), trial % 21, 0.0);
    const auto committee = c.committee(id);
    std::vector<std::pair<double, Salt>> open;
    for (NodeId m : committee) {
      Salt s{};
      for (auto& b : s) b = static_cast<std::uint8_t>(byte(rng));
      open.emplace_back(u(rng), s);
      c.commit_score(id, m, seal_score(open.back().first, s, m), 0.0);
    }
    for (std::size_t i = 0; i < committee.size(); ++i) {
      auto [score, salt] = open[i];
      NodeId node = committee[i];
      switch ((trial + i) % 4) {
        case 0: score = std::nextafter(score, 2.0); break;
        case 1: salt[(trial + i) % salt.size()] ^= static_cast<std::uint8_t>(1u << (i % 8)); break;
        case 2: node = committee[(i + 1) % committee.size()]; break;
        default: break;
      }
      const bool honest = (trial + i) % 4 == 3;
      try {
        c.reveal_score(id, node, score, salt, 0.5);
        if (!honest) ++tampered;  // accepted a tampered reveal
      } catch (const ContractError& e) {
        if (honest) ++tampered;  // rejected an honest reveal
        else if (e.code == ContractErrc::reveal_mismatch) ++caught;
      }
    }
  }
  v.require(tampered == 0 && caught > 0, std::to_string(caught) + " tampered reveals rejected, " +
                                             std::to_string(tampered) + " misjudged");

  std::size_t perm_failures = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> s(1 + trial % 8);
    for (auto& x : s) x = u(rng);
    const double m = median(s);
    for (int k = 0; k < 5; ++k) {
      std::shuffle(s.begin(), s.end(), rng);
      perm_failures += median(s) != m;
    }
  }
  v.require(perm_failures == 0, "median permutation failures " + std::to_string(perm_failures));

  std::size_t rejected = 0, moved = 0;
  for (auto a : {Algorithm::brain, Algorithm::frain}) {
    auto c = base_config();
    c.algorithm = a;
    c.iid = false;
    c.randomizers = 10;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      c.seed = kMasterSeed + seed;
      const auto r = run_experiment(c);
      for (std::size_t i = 1; i < r.rows.size(); ++i) {
        if (r.rows[i].status != "rejected") continue;
        ++rejected;
        moved += r.rows[i].loss != r.rows[i - 1].loss || r.rows[i].accuracy != r.rows[i - 1].accuracy;
      }
      moved += r.consistency_failures;
    }
  }
  v.require(rejected > 0 && moved == 0,
            std::to_string(rejected) + " rejected proposals, " + std::to_string(moved) + " altered a model");
  return v;
}

}  // namespace

int main() {
  report(1, "SLERP matches the extended-precision oracle", slerp_oracle, 60.0);
  report(2, "SLERP norm preservation vs LERP collapse", norm_contrast);
  report(3, "WiMA-BRAIN difference bound", theorem_bound, 60.0);
  report(4, "no-adversary convergence vs centralized SGD", convergence, 300.0);
  report(5, "Byzantine robustness ordering", byzantine, 600.0);
  report(6, "FastSync ablation", fastsync);
  report(7, "SLERP vs LERP under stress", slerp_vs_lerp);
  report(8, "staleness policy ordering", staleness_order);
  report(9, "determinism and honest-node consistency", determinism);
  report(10, "commit-and-reveal soundness", commit_reveal);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
