#pragma once

// Deterministic discrete-event simulator for the asynchronous decentralized
// network. One run is a single-threaded event loop ordered by
// (time, sequence number); independent runs may execute in parallel.
//
// Logical time: one unit is one proposal-generation round. Delays, commit and
// reveal deadlines, and staleness all use that unit.

#include "frain/chain.hpp"
#include "frain/merge.hpp"
#include "frain/tasks.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace frain {

enum class Algorithm { sgd, fedavg, fedasync, brain, frain };
enum class Behavior { honest, nullifier, randomizer };
enum class SyncMode { full_replay, fastsync };
enum class ScoreKind { accuracy, exp_loss };

std::string to_string(Algorithm a);
std::string to_string(Behavior b);
std::string to_string(SyncMode m);
std::string to_string(ScoreKind k);
Algorithm parse_algorithm(const std::string& name);
ScoreKind parse_score_kind(const std::string& name);

struct NodeSpec {
  NodeId id = 0;
  Behavior behavior = Behavior::honest;
  SyncMode sync_mode = SyncMode::full_replay;
};

struct SimConfig {
  Algorithm algorithm = Algorithm::frain;
  std::string label;  // overrides the algorithm column when set

  std::size_t num_nodes = 21;
  std::size_t proposers_per_round = 2;
  std::size_t max_delay = 4;
  std::size_t window = 4;
  double threshold = 0.2;
  double fedasync_alpha = 0.6;

  Interpolation interpolation = Interpolation::slerp;
  Coefficient coefficient = Coefficient::wima;
  StalenessKind staleness = StalenessKind::constant;
  double poly_a = 0.5;
  double hinge_a = 1.0;
  double hinge_b = 2.0;

  TaskSpec task;
  bool iid = true;
  double pareto_shape = 1.16;

  std::size_t nullifiers = 0;
  std::size_t randomizers = 0;
  bool byzantine_on_committee = false;
  std::size_t fastsync_nodes = 0;

  std::size_t committee_size = 5;
  double commit_deadline = 1.0;
  double reveal_deadline = 1.0;
  double committee_dropout = 0.0;
  ScoreKind score = ScoreKind::accuracy;

  std::size_t local_epochs = 1;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  std::uint64_t update_budget = 2000;
  std::uint64_t eval_every = 100;  // centralized SGD evaluation cadence, in gradient steps

  std::uint64_t seed = 0;

  void validate() const;
  StalenessPolicy staleness_policy() const;
  /// Merge rule for brain/frain: brain always uses (lerp, brain, constant).
  MergeMethod merge_method() const;
  std::string algorithm_label() const;
};

struct MetricsRow {
  std::uint64_t seed = 0;
  std::string algorithm;
  double sim_time = 0.0;
  std::uint64_t gradient_updates = 0;
  std::optional<std::uint64_t> round;
  std::optional<double> accuracy;
  double loss = 0.0;
  std::optional<double> score;
  std::optional<double> alpha;
  std::optional<double> staleness;
  std::string status;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct RunResult {
  std::vector<MetricsRow> rows;
  std::uint64_t gradient_updates = 0;
  std::uint64_t honest_proposals = 0;
  std::uint64_t byzantine_proposals = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t consistency_checks = 0;    // accepted merges at which node digests were compared
  std::size_t consistency_failures = 0;  // merges where some honest node disagreed
  double max_fastsync_gap = 0.0;         // max ||fastsync - replay|| / ||replay||
  double last_fastsync_gap = 0.0;
  std::size_t antipodal_fallbacks = 0;
  std::string event_log;  // contract events as JSON lines (brain/frain only)

  double final_accuracy() const;
  double final_loss() const;
};

/// Node roles for a run: Byzantine ids drawn by seed, FastSync on a seeded subset.
std::vector<NodeSpec> make_nodes(const SimConfig& config, std::uint64_t seed);

struct ProposalContext {
  const Task* task = nullptr;
  std::span<const std::size_t> shard;
  TrainOptions train;
  std::size_t max_delay = 0;
};

struct ScheduledProposal {
  ParamVec model;
  double delivery_time = 0.0;
  std::uint64_t gradient_steps = 0;
};

/// Builds a node's proposal from its base model and draws its delivery delay.
ScheduledProposal schedule_proposal(const NodeSpec& node, const ParamVec& base, double now, std::mt19937_64& rng,
                                    const ProposalContext& ctx);

/// Global model as seen by a node: full replay of every accepted proposal, or
/// FastSync over the two most recent ones.
ParamVec node_view(SyncMode mode, const Contract& contract, const ContentStore& store, const MergeMethod& method,
                   const ParamVec& initial);

RunResult run_experiment(const SimConfig& config);

/// Repeats with seeds config.seed + i, run in parallel, returned in seed order.
std::vector<RunResult> run_repeats(const SimConfig& config, std::size_t repeats);

/// Derives an independent 64-bit seed for a named purpose.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace frain
