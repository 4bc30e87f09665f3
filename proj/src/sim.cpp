#include "frain/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace frain {

// ---------------------------------------------------------------- names

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::sgd: return "sgd";
    case Algorithm::fedavg: return "fedavg";
    case Algorithm::fedasync: return "fedasync";
    case Algorithm::brain: return "brain";
    case Algorithm::frain: return "frain";
  }
  return "unknown";
}

std::string to_string(Behavior b) {
  switch (b) {
    case Behavior::honest: return "honest";
    case Behavior::nullifier: return "nullifier";
    case Behavior::randomizer: return "randomizer";
  }
  return "unknown";
}

std::string to_string(SyncMode m) { return m == SyncMode::full_replay ? "full_replay" : "fastsync"; }
std::string to_string(ScoreKind k) { return k == ScoreKind::accuracy ? "accuracy" : "exp-loss"; }

Algorithm parse_algorithm(const std::string& name) {
  for (auto a : {Algorithm::sgd, Algorithm::fedavg, Algorithm::fedasync, Algorithm::brain, Algorithm::frain})
    if (to_string(a) == name) return a;
  throw std::invalid_argument("unknown algorithm '" + name + "' (expected sgd, fedavg, fedasync, brain or frain)");
}

ScoreKind parse_score_kind(const std::string& name) {
  if (name == "accuracy") return ScoreKind::accuracy;
  if (name == "exp-loss" || name == "exp_loss") return ScoreKind::exp_loss;
  throw std::invalid_argument("unknown score '" + name + "' (expected accuracy or exp-loss)");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// ---------------------------------------------------------------- config

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (num_nodes < 1) fail("num-nodes must be >= 1");
  if (proposers_per_round < 1 || proposers_per_round > num_nodes) fail("proposers-per-round must lie in [1, num-nodes]");
  if (window < 1) fail("window must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0)) fail("threshold must lie in (0, 1)");
  if (!(fedasync_alpha >= 0.0 && fedasync_alpha <= 1.0)) fail("fedasync-alpha must lie in [0, 1]");
  staleness_policy().validate();
  task.validate();
  if (!(pareto_shape > 0.0)) fail("pareto-shape must be > 0");
  if (nullifiers + randomizers >= num_nodes) fail("at least one honest node is required");
  if (fastsync_nodes > num_nodes) fail("fastsync-nodes exceeds num-nodes");
  const bool chain_based = algorithm == Algorithm::brain || algorithm == Algorithm::frain;
  if (chain_based && committee_size >= num_nodes) fail("committee-size must be smaller than num-nodes");
  if (chain_based && committee_size < 1) fail("committee-size must be >= 1");
  if (!(commit_deadline > 0.0) || !(reveal_deadline > 0.0)) fail("commit/reveal deadlines must be > 0");
  if (!(committee_dropout >= 0.0 && committee_dropout < 1.0)) fail("committee-dropout must lie in [0, 1)");
  if (task.kind == TaskKind::quadratic && score == ScoreKind::accuracy)
    fail("the quadratic task has no accuracy; use score exp-loss");
  if (batch_size < 1) fail("batch-size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) fail("learning-rate must be finite and >= 0");
  if (update_budget < 1) fail("update-budget must be >= 1");
  if (eval_every < 1) fail("eval-every must be >= 1");
  if (task.kind == TaskKind::softmax_blobs && num_nodes > task.samples * 4 / 5) fail("more nodes than training samples");
}

StalenessPolicy SimConfig::staleness_policy() const {
  switch (staleness) {
    case StalenessKind::constant: return StalenessPolicy::constant();
    case StalenessKind::polynomial: return StalenessPolicy::polynomial(poly_a);
    case StalenessKind::hinge: return StalenessPolicy::hinge(hinge_a, hinge_b);
  }
  return StalenessPolicy::constant();
}

MergeMethod SimConfig::merge_method() const {
  if (algorithm == Algorithm::brain) return MergeMethod::brain();
  return {interpolation, coefficient, staleness_policy()};
}

std::string SimConfig::algorithm_label() const { return label.empty() ? to_string(algorithm) : label; }

double RunResult::final_accuracy() const {
  if (rows.empty() || !rows.back().accuracy) return std::nan("");
  return *rows.back().accuracy;
}

double RunResult::final_loss() const { return rows.empty() ? std::nan("") : rows.back().loss; }

// ---------------------------------------------------------------- nodes

std::vector<NodeSpec> make_nodes(const SimConfig& config, std::uint64_t seed) {
  std::vector<NodeSpec> nodes(config.num_nodes);
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].id = i;

  std::vector<std::size_t> order(config.num_nodes);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 byz_rng(derive_seed(seed, 0xB1));
  std::shuffle(order.begin(), order.end(), byz_rng);
  for (std::size_t i = 0; i < config.nullifiers; ++i) nodes[order[i]].behavior = Behavior::nullifier;
  for (std::size_t i = 0; i < config.randomizers; ++i) nodes[order[config.nullifiers + i]].behavior = Behavior::randomizer;

  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 sync_rng(derive_seed(seed, 0xF5));
  std::shuffle(order.begin(), order.end(), sync_rng);
  for (std::size_t i = 0; i < config.fastsync_nodes; ++i) nodes[order[i]].sync_mode = SyncMode::fastsync;
  return nodes;
}

ScheduledProposal schedule_proposal(const NodeSpec& node, const ParamVec& base, double now, std::mt19937_64& rng,
                                    const ProposalContext& ctx) {
  const std::uint64_t sub_seed = rng();
  std::uniform_int_distribution<std::size_t> delay(0, ctx.max_delay);
  const double delivery = now + static_cast<double>(delay(rng));

  switch (node.behavior) {
    case Behavior::honest: {
      TrainOptions opts = ctx.train;
      opts.seed = sub_seed;
      auto model = local_train(base, ctx.shard, *ctx.task, ctx.task->train, opts);
      return {std::move(model), delivery, gradient_steps(ctx.shard.size(), opts)};
    }
    case Behavior::nullifier:
      return {base, delivery, 0};
    case Behavior::randomizer: {
      std::mt19937_64 local(sub_seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::vector<double> w(base.dim());
      for (auto& v : w) v = gauss(local);
      return {ParamVec(std::move(w)), delivery, 0};
    }
  }
  return {base, delivery, 0};
}

ParamVec node_view(SyncMode mode, const Contract& contract, const ContentStore& store, const MergeMethod& method,
                   const ParamVec& initial) {
  const auto& st = contract.state();
  const std::size_t rounds = st.accepted.size();
  if (rounds == 0) return initial;
  auto model_of = [&](std::size_t r) -> const ParamVec& { return store.get(st.proposals[st.accepted[r]].digest); };

  if (mode == SyncMode::fastsync) {
    if (rounds == 1) return model_of(0);
    return fast_sync(model_of(rounds - 2), model_of(rounds - 1), contract.frozen_alpha(rounds - 2, method),
                     contract.frozen_alpha(rounds - 1, method));
  }

  std::vector<ParamVec> proposals;
  std::vector<double> enqueue;
  std::vector<double> merged;
  proposals.reserve(rounds);
  for (std::size_t r = 0; r < rounds; ++r) {
    const auto& rec = st.proposals[st.accepted[r]];
    proposals.push_back(model_of(r));
    enqueue.push_back(rec.enqueue_time);
    merged.push_back(*rec.finalize_time);
  }
  return replay_global(method, initial, proposals, st.score_window, enqueue, merged);
}

// ---------------------------------------------------------------- engine

namespace {

struct Evaluation {
  std::optional<double> accuracy;
  double loss = 0.0;
};

Evaluation evaluate(const ParamVec& model, const Task& task) {
  Evaluation e;
  if (task.spec.kind == TaskKind::softmax_blobs) e.accuracy = score_accuracy(model, task, task.eval);
  e.loss = mean_loss(model, task, task.eval);
  return e;
}

enum class EventKind { generate, deliver, commit_deadline };

struct Event {
  double time;
  std::uint64_t seq;
  EventKind kind;
  std::uint64_t payload;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const { return std::tie(a.time, a.seq) > std::tie(b.time, b.seq); }
};

class EventQueue {
 public:
  void push(double time, EventKind kind, std::uint64_t payload = 0) { q_.push({time, next_++, kind, payload}); }
  bool empty() const { return q_.empty(); }
  Event pop() {
    Event e = q_.top();
    q_.pop();
    return e;
  }

 private:
  std::priority_queue<Event, std::vector<Event>, EventLater> q_;
  std::uint64_t next_ = 0;
};

// Shared per-run state for every algorithm.
class Run {
 public:
  explicit Run(const SimConfig& cfg)
      : cfg_(cfg),
        task_(make_task([&] {
          TaskSpec spec = cfg.task;
          spec.seed = derive_seed(cfg.seed, 0x7A5C);
          return spec;
        }())),
        nodes_(make_nodes(cfg, cfg.seed)),
        schedule_rng_(derive_seed(cfg.seed, 0x5C4E)),
        aux_rng_(derive_seed(cfg.seed, 0xA0C5)) {
    const auto part_seed = derive_seed(cfg.seed, 0x9A27);
    if (cfg.algorithm != Algorithm::sgd) {
      shards_ = cfg.iid ? iid_partition(task_.train, cfg.num_nodes, part_seed)
                        : pareto_partition(task_.train, cfg.num_nodes, cfg.pareto_shape, part_seed);
      local_data_.reserve(shards_.size());
      for (const auto& s : shards_) local_data_.push_back(task_.train.subset(s.indices));
    }
    train_.epochs = cfg.local_epochs;
    train_.learning_rate = cfg.learning_rate;
    train_.batch_size = cfg.batch_size;
    last_eval_ = evaluate(task_.initial, task_);
  }

  RunResult execute() {
    switch (cfg_.algorithm) {
      case Algorithm::sgd: run_sgd(); break;
      case Algorithm::fedavg: run_fedavg(); break;
      case Algorithm::fedasync: run_fedasync(); break;
      case Algorithm::brain:
      case Algorithm::frain: run_chain(); break;
    }
    result_.gradient_updates = updates_;
    return std::move(result_);
  }

 private:
  // ------------------------------------------------------------ helpers

  double generation_cap() const { return static_cast<double>(cfg_.update_budget) * 10.0 + 1000.0; }

  std::vector<NodeId> pick_proposers() {
    std::vector<NodeId> pool(cfg_.num_nodes);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < cfg_.proposers_per_round; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(schedule_rng_)]);
    }
    pool.resize(cfg_.proposers_per_round);
    return pool;
  }

  ScheduledProposal propose(NodeId node, const ParamVec& base, double now) {
    ProposalContext ctx{&task_, shards_[node].indices, train_, cfg_.max_delay};
    auto sp = schedule_proposal(nodes_[node], base, now, schedule_rng_, ctx);
    updates_ += sp.gradient_steps;
    if (nodes_[node].behavior == Behavior::honest)
      ++result_.honest_proposals;
    else
      ++result_.byzantine_proposals;
    return sp;
  }

  void emit(double time, std::optional<std::uint64_t> round, const Evaluation& e, std::optional<double> score,
            std::optional<double> alpha, std::optional<double> staleness, std::string status) {
    MetricsRow row;
    row.seed = cfg_.seed;
    row.algorithm = cfg_.algorithm_label();
    row.sim_time = time;
    row.gradient_updates = updates_;
    row.round = round;
    row.accuracy = e.accuracy;
    row.loss = e.loss;
    row.score = score;
    row.alpha = alpha;
    row.staleness = staleness;
    row.status = std::move(status);
    result_.rows.push_back(std::move(row));
  }

  double committee_score(NodeId member, const ParamVec& model) const {
    if (cfg_.byzantine_on_committee && nodes_[member].behavior != Behavior::honest) return 1.0;
    const auto& data = local_data_[member];
    const double s = cfg_.score == ScoreKind::accuracy ? score_accuracy(model, task_, data)
                                                       : score_exp_loss(model, task_, data);
    return std::clamp(s, 0.0, 1.0);
  }

  // ------------------------------------------------------------ sgd

  void run_sgd() {
    std::vector<std::size_t> order(task_.train.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(cfg_.seed, 0x56D));
    std::vector<double> w(task_.initial.values().begin(), task_.initial.values().end());
    std::vector<double> grad(w.size());
    std::uint64_t evals = 0;
    std::size_t pos = order.size();
    while (updates_ < cfg_.update_budget) {
      if (pos >= order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        pos = 0;
      }
      const std::size_t hi = std::min(order.size(), pos + cfg_.batch_size);
      loss_and_gradient(ParamVec(w), task_, task_.train, std::span(order).subspan(pos, hi - pos), grad);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg_.learning_rate * grad[i];
      pos = hi;
      ++updates_;
      if (updates_ % cfg_.eval_every == 0 || updates_ == cfg_.update_budget) {
        ++evals;
        emit(static_cast<double>(evals), evals, evaluate(ParamVec(w), task_), std::nullopt, std::nullopt,
             std::nullopt, "trained");
      }
    }
  }

  // ------------------------------------------------------------ fedavg

  void run_fedavg() {
    ParamVec global = task_.initial;
    double now = 0.0;
    std::uint64_t round = 0;
    while (updates_ < cfg_.update_budget && static_cast<double>(round) < generation_cap()) {
      std::vector<ParamVec> models;
      std::vector<std::uint64_t> counts;
      double slowest = 0.0;
      for (NodeId p : pick_proposers()) {
        auto sp = propose(p, global, now);
        slowest = std::max(slowest, sp.delivery_time - now);
        models.push_back(std::move(sp.model));
        counts.push_back(shards_[p].indices.size());
      }
      now += slowest;
      global = fedavg_aggregate(models, counts);
      ++round;
      emit(now, round, evaluate(global, task_), std::nullopt, std::nullopt, slowest, "aggregated");
    }
  }

  // ------------------------------------------------------------ fedasync

  void run_fedasync() {
    ParamVec global = task_.initial;
    const auto policy = cfg_.staleness_policy();
    struct Pending {
      ParamVec model;
      double created;
    };
    std::map<std::uint64_t, Pending> pending;
    std::uint64_t next_id = 0;
    std::uint64_t applied = 0;
    EventQueue q;
    q.push(0.0, EventKind::generate);
    while (!q.empty()) {
      const Event ev = q.pop();
      if (ev.kind == EventKind::generate) {
        if (updates_ >= cfg_.update_budget || ev.time >= generation_cap()) continue;
        for (NodeId p : pick_proposers()) {
          auto sp = propose(p, global, ev.time);
          pending.emplace(next_id, Pending{std::move(sp.model), ev.time});
          q.push(sp.delivery_time, EventKind::deliver, next_id++);
        }
        q.push(ev.time + 1.0, EventKind::generate);
      } else {
        auto node = pending.extract(ev.payload);
        auto& p = node.mapped();
        const double alpha = apply_decay(cfg_.fedasync_alpha, policy, ev.time, p.created);
        global = fedasync_update(global, p.model, cfg_.fedasync_alpha, policy, ev.time, p.created);
        ++applied;
        emit(ev.time, applied, evaluate(global, task_), std::nullopt, alpha, ev.time - p.created, "applied");
      }
    }
  }

  // ------------------------------------------------------------ brain / frain

  struct PendingProposal {
    NodeId proposer;
    ParamVec model;
    std::map<NodeId, std::pair<double, Salt>> sealed;  // private (score, salt) per committed member
  };

  ParamVec view_for(NodeId node, const Contract& contract, const ContentStore& store, const ParamVec& canonical,
                    const std::vector<std::optional<ParamVec>>& held, const MergeMethod& method) const {
    if (nodes_[node].sync_mode == SyncMode::fastsync)
      return node_view(SyncMode::fastsync, contract, store, method, task_.initial);
    return held[node] ? *held[node] : canonical;
  }

  Salt draw_salt() {
    Salt s;
    for (std::size_t i = 0; i < s.size(); i += 8) {
      const std::uint64_t v = aux_rng_();
      for (std::size_t j = 0; j < 8; ++j) s[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
    }
    return s;
  }

  void run_chain() {
    const MergeMethod method = cfg_.merge_method();
    ContractConfig cc;
    cc.num_nodes = cfg_.num_nodes;
    cc.committee_size = cfg_.committee_size;
    cc.window = cfg_.window;
    cc.threshold = cfg_.threshold;
    cc.rng_seed = derive_seed(cfg_.seed, 0xC0);
    cc.commit_window = static_cast<double>(cfg_.max_delay) + cfg_.commit_deadline;
    cc.reveal_window = cfg_.reveal_deadline;
    Contract contract(cc);
    ContentStore store;

    ParamVec canonical = task_.initial;
    std::vector<std::optional<ParamVec>> held(cfg_.num_nodes);
    for (const auto& n : nodes_)
      if (n.sync_mode == SyncMode::full_replay) held[n.id] = task_.initial;

    std::map<ProposalId, PendingProposal> pending;
    std::bernoulli_distribution dropout(cfg_.committee_dropout);
    EventQueue q;
    q.push(0.0, EventKind::generate);

    auto finalize = [&](ProposalId id, double now) {
      auto node = pending.extract(id);
      auto& pp = node.mapped();
      const auto outcome = contract.finalize(id, now);
      const auto& rec = contract.proposal(id);
      const double staleness = now - rec.enqueue_time;
      if (!outcome.accepted) {
        ++result_.rejected;
        emit(now, std::nullopt, last_eval_, outcome.reveal_count ? std::optional(outcome.median) : std::nullopt,
             std::nullopt, staleness, "rejected");
        return;
      }
      ++result_.accepted;
      const std::size_t r = *outcome.round;
      auto merged = merge_step_traced(method, canonical, pp.model, contract.score_window(), r, now, rec.enqueue_time);
      canonical = std::move(merged.model);
      for (auto& h : held)
        if (h) *h = merge_step(method, *h, pp.model, contract.score_window(), r, now, rec.enqueue_time);

      // Aggregator-free consistency: every honest full-replay node must hold the same bytes.
      const auto expected = digest(canonical);
      bool consistent = true;
      for (const auto& n : nodes_)
        if (n.behavior == Behavior::honest && held[n.id] && digest(*held[n.id]) != expected) consistent = false;
      ++result_.consistency_checks;
      if (!consistent) ++result_.consistency_failures;

      const auto fs = node_view(SyncMode::fastsync, contract, store, method, task_.initial);
      const double base = norm(canonical);
      std::vector<double> diff(canonical.dim());
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = fs[i] - canonical[i];
      const double gap = base > 0.0 ? norm(ParamVec(diff)) / base : 0.0;
      result_.last_fastsync_gap = gap;
      result_.max_fastsync_gap = std::max(result_.max_fastsync_gap, gap);

      std::string status = "accepted";
      if (merged.path == SlerpPath::antipodal_fallback) {
        ++result_.antipodal_fallbacks;
        status = "accepted_antipodal";
      }
      last_eval_ = evaluate(canonical, task_);
      emit(now, r, last_eval_, outcome.median, r == 0 ? std::nullopt : std::optional(merged.alpha), staleness,
           status);
    };

    while (!q.empty()) {
      const Event ev = q.pop();
      switch (ev.kind) {
        case EventKind::generate: {
          if (updates_ >= cfg_.update_budget || ev.time >= generation_cap()) break;
          for (NodeId p : pick_proposers()) {
            const auto base = view_for(p, contract, store, canonical, held, method);
            auto sp = propose(p, base, ev.time);
            const auto d = store.put(sp.model);
            const ProposalId id = contract.submit_proposal(store, d, p, ev.time);
            pending.emplace(id, PendingProposal{p, std::move(sp.model), {}});
            q.push(sp.delivery_time, EventKind::deliver, id);
          }
          q.push(ev.time + 1.0, EventKind::generate);
          break;
        }
        case EventKind::deliver: {
          const ProposalId id = ev.payload;
          auto& pp = pending.at(id);
          for (NodeId m : contract.committee(id)) {
            if (dropout(aux_rng_)) continue;
            const double s = committee_score(m, pp.model);
            const Salt salt = draw_salt();
            contract.commit_score(id, m, seal_score(s, salt, m), ev.time);
            pp.sealed.emplace(m, std::make_pair(s, salt));
          }
          if (contract.proposal(id).status == ProposalStatus::revealing) {
            for (const auto& [m, sv] : pp.sealed) contract.reveal_score(id, m, sv.first, sv.second, ev.time);
            finalize(id, ev.time);
          } else {
            q.push(contract.proposal(id).commit_deadline, EventKind::commit_deadline, id);
          }
          break;
        }
        case EventKind::commit_deadline: {
          const ProposalId id = ev.payload;
          contract.advance_time(ev.time);
          auto& pp = pending.at(id);
          for (const auto& [m, sv] : pp.sealed) contract.reveal_score(id, m, sv.first, sv.second, ev.time);
          finalize(id, ev.time);
          break;
        }
      }
    }
    std::ostringstream log;
    contract.write_event_log(log);
    result_.event_log = log.str();
  }

  const SimConfig& cfg_;
  Task task_;
  std::vector<NodeSpec> nodes_;
  std::vector<ClientShard> shards_;
  std::vector<Dataset> local_data_;
  TrainOptions train_;
  std::mt19937_64 schedule_rng_;
  std::mt19937_64 aux_rng_;
  std::uint64_t updates_ = 0;
  Evaluation last_eval_;
  RunResult result_;
};

}  // namespace

RunResult run_experiment(const SimConfig& config) {
  config.validate();
  Run run(config);
  return run.execute();
}

std::vector<RunResult> run_repeats(const SimConfig& config, std::size_t repeats) {
  config.validate();
  std::vector<RunResult> out(repeats);
  const auto n = static_cast<std::ptrdiff_t>(repeats);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    SimConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(i);
    out[static_cast<std::size_t>(i)] = run_experiment(c);
  }
  return out;
}

}  // namespace frain
