// frain: experiment runner, ablation presets, offline merge, and theorem check.
//
// Exit codes: 0 success, 1 usage or config error, 2 bound violation.

#include "frain/config.hpp"
#include "frain/merge.hpp"
#include "frain/report.hpp"
#include "frain/theorem.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace frain;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kViolation = 2;

ExperimentConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides) {
  ExperimentConfig cfg = path.empty() ? ExperimentConfig{} : load_config(path);
  for (const auto& o : overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

void write_outputs(const fs::path& dir, const std::string& stem, const std::vector<RunResult>& runs) {
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / (stem + ".csv"));
    write_metrics_csv(csv, runs);
  }
  std::ofstream summary(dir / (stem + "-summary.json"));
  summary << summary_json(runs).dump(2) << '\n';
}

void print_groups(const std::vector<RunResult>& runs) {
  for (const auto& g : summarize(runs))
    std::printf("%-36s runs=%zu mean=%.4f std=%.4f\n", g.algorithm.c_str(), g.runs, g.mean, g.stddev);
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides, bool events) {
  const auto cfg = resolve_config(config_path, overrides);
  if (!cfg.preset.empty()) {
    std::cerr << "config names preset '" << cfg.preset << "'; use the ablate subcommand\n";
    return kUsage;
  }
  const auto runs = run_repeats(cfg.sim, cfg.repeat);
  const fs::path dir = cfg.output_dir;
  write_outputs(dir, "metrics", runs);
  {
    std::ofstream eff(dir / "config.json");
    eff << to_json(cfg).dump(2) << '\n';
  }
  if (events) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      std::ofstream log(dir / ("events-" + std::to_string(cfg.sim.seed + i) + ".jsonl"));
      log << runs[i].event_log;
    }
  }
  print_groups(runs);
  return kOk;
}

int cmd_ablate(const std::string& preset, const std::string& config_path, const std::vector<std::string>& overrides) {
  auto cfg = resolve_config(config_path, overrides);
  const std::string name = preset.empty() ? cfg.preset : preset;
  if (name.empty()) {
    std::cerr << "no preset given (expected fastsync, slerp_vs_lerp, staleness or byzantine)\n";
    return kUsage;
  }
  const auto matrix = ablation_matrix(name, cfg.sim);
  for (const auto& c : matrix) c.validate();
  std::vector<RunResult> all;
  for (const auto& c : matrix) {
    auto runs = run_repeats(c, cfg.repeat);
    for (auto& r : runs) all.push_back(std::move(r));
  }
  write_outputs(cfg.output_dir, "ablation-" + name, all);
  print_groups(all);
  return kOk;
}

int cmd_merge(const std::string& a_path, const std::string& b_path, double alpha, const std::string& interp,
              const std::string& out_path) {
  const auto a = read_checkpoint(a_path);
  const auto b = read_checkpoint(b_path);
  const auto method = parse_interpolation(interp);
  const auto merged = method == Interpolation::slerp ? slerp(a, b, alpha) : lerp(a, b, alpha);
  write_checkpoint(out_path, merged);
  std::cout << digest(merged).hex() << '\n';
  return kOk;
}

int cmd_check_theorem(const BoundTrial& trial, std::size_t trials) {
  const auto s = run_bound_trials(trial, trials);
  std::printf("trials=%zu steps=%zu max_ratio=%.6f violations=%zu step_violations=%zu norm_violations=%zu\n",
              s.trials, s.steps, s.max_ratio, s.violations, s.step_violations, s.norm_violations);
  return (s.violations || s.step_violations) ? kViolation : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FRAIN asynchronous decentralized federated learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool events = false;
  auto* run = app.add_subcommand("run", "run repeated seeded experiments from a config");
  run->add_option("config", config_path, "JSON config file (defaults when omitted)");
  run->add_option("--set", overrides, "override a config key, key=value")->take_all();
  run->add_flag("--events", events, "also write contract events as JSON lines per run");

  std::string preset;
  auto* ablate = app.add_subcommand("ablate", "run an ablation preset");
  ablate->add_option("preset", preset, "fastsync, slerp_vs_lerp, staleness or byzantine");
  ablate->add_option("--config", config_path, "base JSON config");
  ablate->add_option("--set", overrides, "override a config key, key=value")->take_all();

  std::string a_path, b_path, out_path, interp = "slerp";
  double alpha = 0.5;
  auto* merge = app.add_subcommand("merge", "merge two checkpoints");
  merge->add_option("a", a_path, "first checkpoint")->required()->check(CLI::ExistingFile);
  merge->add_option("b", b_path, "second checkpoint")->required()->check(CLI::ExistingFile);
  merge->add_option("--alpha", alpha, "weight toward b")->check(CLI::Range(0.0, 1.0));
  merge->add_option("--method", interp, "slerp or lerp");
  merge->add_option("-o,--out", out_path, "output checkpoint")->required();

  BoundTrial trial;
  std::size_t trials = 1000;
  auto* theorem = app.add_subcommand("check-theorem", "verify the WiMA-vs-BRAIN difference bound");
  theorem->add_option("--trials", trials, "independent trials");
  theorem->add_option("--horizon", trial.horizon, "rounds per trial");
  theorem->add_option("--threshold", trial.threshold, "T");
  theorem->add_option("--bound", trial.norm_bound, "B");
  theorem->add_option("--window", trial.window, "N");
  theorem->add_option("--dim", trial.dim, "model dimension");
  theorem->add_option("--seed", trial.seed, "first trial seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(config_path, overrides, events);
    if (*ablate) return cmd_ablate(preset, config_path, overrides);
    if (*merge) return cmd_merge(a_path, b_path, alpha, interp, out_path);
    if (*theorem) return cmd_check_theorem(trial, trials);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
