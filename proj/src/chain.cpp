#include "frain/chain.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <random>

namespace frain {

// ---------------------------------------------------------------- store

ModelDigest ContentStore::put(const ParamVec& model) {
  const auto d = digest(model);
  blobs_.try_emplace(d, model);
  return d;
}

void ContentStore::put(const ModelDigest& claimed, const ParamVec& model) {
  if (digest(model) != claimed)
    throw std::invalid_argument("content store: model does not hash to claimed digest " + claimed.hex());
  blobs_.try_emplace(claimed, model);
}

const ParamVec& ContentStore::get(const ModelDigest& d) const {
  auto it = blobs_.find(d);
  if (it == blobs_.end()) throw std::out_of_range("content store: unknown digest " + d.hex());
  return it->second;
}

// ---------------------------------------------------------------- helpers

std::string to_string(ProposalStatus s) {
  switch (s) {
    case ProposalStatus::committing: return "committing";
    case ProposalStatus::revealing: return "revealing";
    case ProposalStatus::accepted: return "accepted";
    case ProposalStatus::rejected: return "rejected";
  }
  return "unknown";
}

Digest32 seal_score(double score, const Salt& salt, NodeId node) {
  std::array<std::uint8_t, 32> buf{};
  const auto bits = std::bit_cast<std::uint64_t>(score);
  for (int i = 0; i < 8; ++i) buf[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(bits >> (8 * i));
  std::copy(salt.begin(), salt.end(), buf.begin() + 8);
  for (int i = 0; i < 8; ++i) buf[24 + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(node >> (8 * i));
  return sha256(buf);
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<NodeId> select_committee(std::uint64_t rng_seed, ProposalId id, NodeId proposer, std::size_t num_nodes,
                                     std::size_t committee_size) {
  if (committee_size >= num_nodes)
    throw ContractError(ContractErrc::committee_too_large, "committee size " + std::to_string(committee_size) +
                                                               " must be smaller than node count " +
                                                               std::to_string(num_nodes));
  std::vector<NodeId> pool;
  pool.reserve(num_nodes - 1);
  for (NodeId n = 0; n < num_nodes; ++n)
    if (n != proposer) pool.push_back(n);

  std::seed_seq seq{static_cast<std::uint32_t>(rng_seed), static_cast<std::uint32_t>(rng_seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32), 0xC0u};
  std::mt19937_64 rng(seq);
  // Partial Fisher-Yates: the first committee_size slots are the sample.
  for (std::size_t i = 0; i < committee_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(committee_size);
  return pool;
}

// ---------------------------------------------------------------- contract

ContractState::ContractState(const ContractConfig& cfg) : config(cfg), score_window(cfg.window, cfg.threshold) {}

bool operator==(const ContractState& a, const ContractState& b) {
  const auto& ca = a.config;
  const auto& cb = b.config;
  const bool same_config = ca.num_nodes == cb.num_nodes && ca.committee_size == cb.committee_size &&
                           ca.window == cb.window && ca.threshold == cb.threshold && ca.rng_seed == cb.rng_seed &&
                           ca.commit_window == cb.commit_window && ca.reveal_window == cb.reveal_window;
  return same_config && a.proposals == b.proposals && a.commitments == b.commitments && a.reveals == b.reveals &&
         a.flagged == b.flagged && a.score_window == b.score_window && a.accepted == b.accepted &&
         a.events == b.events;
}

Contract::Contract(const ContractConfig& config) : state_(config) {
  if (config.committee_size == 0) throw std::invalid_argument("contract: committee size must be >= 1");
  if (config.committee_size >= config.num_nodes)
    throw ContractError(ContractErrc::committee_too_large, "committee size " + std::to_string(config.committee_size) +
                                                               " must be smaller than node count " +
                                                               std::to_string(config.num_nodes));
}

ProposalRecord& Contract::mutable_proposal(ProposalId id) {
  if (id >= state_.proposals.size())
    throw ContractError(ContractErrc::unknown_proposal, "unknown proposal " + std::to_string(id));
  return state_.proposals[id];
}

const ProposalRecord& Contract::proposal(ProposalId id) const {
  if (id >= state_.proposals.size())
    throw ContractError(ContractErrc::unknown_proposal, "unknown proposal " + std::to_string(id));
  return state_.proposals[id];
}

void Contract::log(const std::string& kind, ProposalId id, std::optional<NodeId> node, double time) {
  state_.events.push_back({kind, id, node, time});
}

ProposalId Contract::submit_proposal(const ContentStore& store, const ModelDigest& digest, NodeId proposer,
                                     double now) {
  if (!store.contains(digest))
    throw ContractError(ContractErrc::unknown_digest, "proposal digest " + digest.hex() + " not published");
  if (proposer >= state_.config.num_nodes)
    throw std::out_of_range("submit_proposal: proposer " + std::to_string(proposer) + " is not a known node");
  ProposalRecord rec;
  rec.id = state_.proposals.size();
  rec.digest = digest;
  rec.proposer = proposer;
  rec.enqueue_time = now;
  rec.status = ProposalStatus::committing;
  rec.committee = select_committee(state_.config.rng_seed, rec.id, proposer, state_.config.num_nodes,
                                   state_.config.committee_size);
  rec.commit_deadline = now + state_.config.commit_window;
  state_.proposals.push_back(std::move(rec));
  log("submit", state_.proposals.back().id, proposer, now);
  return state_.proposals.back().id;
}

const std::vector<NodeId>& Contract::committee(ProposalId id) const { return proposal(id).committee; }

void Contract::enter_revealing(ProposalRecord& rec, double now) {
  rec.status = ProposalStatus::revealing;
  rec.reveal_deadline = now + state_.config.reveal_window;
  log("revealing", rec.id, std::nullopt, now);
}

void Contract::commit_score(ProposalId id, NodeId node, const Digest32& sealed, double now) {
  auto& rec = mutable_proposal(id);
  if (rec.status != ProposalStatus::committing)
    throw ContractError(ContractErrc::phase_violation,
                        "commit for proposal " + std::to_string(id) + " while " + to_string(rec.status));
  if (now > rec.commit_deadline)
    throw ContractError(ContractErrc::deadline_passed, "commit deadline passed for proposal " + std::to_string(id));
  if (std::find(rec.committee.begin(), rec.committee.end(), node) == rec.committee.end())
    throw ContractError(ContractErrc::not_in_committee,
                        "node " + std::to_string(node) + " is not on the committee of proposal " + std::to_string(id));
  const auto key = std::make_pair(id, node);
  if (state_.commitments.count(key))
    throw ContractError(ContractErrc::duplicate_commit, "node " + std::to_string(node) + " already committed");
  state_.commitments.emplace(key, Commitment{node, sealed});
  log("commit", id, node, now);

  const bool everyone = std::all_of(rec.committee.begin(), rec.committee.end(),
                                    [&](NodeId m) { return state_.commitments.count({id, m}) != 0; });
  if (everyone) enter_revealing(rec, now);
}

void Contract::reveal_score(ProposalId id, NodeId node, double score, const Salt& salt, double now) {
  auto& rec = mutable_proposal(id);
  if (rec.status != ProposalStatus::revealing)
    throw ContractError(ContractErrc::phase_violation,
                        "reveal for proposal " + std::to_string(id) + " while " + to_string(rec.status));
  if (now > rec.reveal_deadline)
    throw ContractError(ContractErrc::deadline_passed, "reveal deadline passed for proposal " + std::to_string(id));
  const auto key = std::make_pair(id, node);
  auto it = state_.commitments.find(key);
  if (it == state_.commitments.end())
    throw ContractError(ContractErrc::missing_commitment, "node " + std::to_string(node) + " never committed");
  if (state_.reveals.count(key))
    throw ContractError(ContractErrc::duplicate_reveal, "node " + std::to_string(node) + " already revealed");
  if (!(score >= 0.0 && score <= 1.0))
    throw ContractError(ContractErrc::invalid_score, "score " + std::to_string(score) + " outside [0, 1]");
  if (seal_score(score, salt, node) != it->second.sealed) {
    state_.flagged.insert(node);
    log("reveal_rejected", id, node, now);
    throw ContractError(ContractErrc::reveal_mismatch,
                        "reveal by node " + std::to_string(node) + " does not match its commitment");
  }
  state_.reveals.emplace(key, score);
  log("reveal", id, node, now);
}

std::vector<ProposalId> Contract::advance_time(double now) {
  std::vector<ProposalId> ready;
  for (auto& rec : state_.proposals) {
    if (rec.status == ProposalStatus::committing && now >= rec.commit_deadline) {
      rec.status = ProposalStatus::revealing;
      rec.reveal_deadline = rec.commit_deadline + state_.config.reveal_window;
      log("revealing", rec.id, std::nullopt, rec.commit_deadline);
    }
    if (rec.status == ProposalStatus::revealing && now >= rec.reveal_deadline) ready.push_back(rec.id);
  }
  return ready;
}

bool Contract::all_revealed(ProposalId id) const {
  const auto& rec = proposal(id);
  for (NodeId m : rec.committee) {
    if (state_.commitments.count({id, m}) && !state_.reveals.count({id, m})) return false;
  }
  return true;
}

FinalizeOutcome Contract::finalize(ProposalId id, double now) {
  auto& rec = mutable_proposal(id);
  if (rec.status != ProposalStatus::revealing)
    throw ContractError(ContractErrc::phase_violation,
                        "finalize for proposal " + std::to_string(id) + " while " + to_string(rec.status));
  std::vector<double> scores;
  for (NodeId m : rec.committee) {
    auto it = state_.reveals.find({id, m});
    if (it != state_.reveals.end()) scores.push_back(it->second);
  }
  FinalizeOutcome out;
  out.reveal_count = scores.size();
  rec.finalize_time = now;
  if (scores.empty()) {
    rec.status = ProposalStatus::rejected;
    log("rejected", id, std::nullopt, now);
    return out;
  }
  out.median = median(std::move(scores));
  rec.score = out.median;
  if (out.median >= state_.config.threshold) {
    const std::size_t r = state_.score_window.append(out.median);
    rec.status = ProposalStatus::accepted;
    rec.round = r;
    state_.accepted.push_back(id);
    out.accepted = true;
    out.round = r;
    log("accepted", id, std::nullopt, now);
  } else {
    rec.status = ProposalStatus::rejected;
    log("rejected", id, std::nullopt, now);
  }
  return out;
}

double Contract::frozen_alpha(std::size_t round, const MergeMethod& method) const {
  if (round >= state_.accepted.size()) throw std::out_of_range("frozen_alpha: round " + std::to_string(round) + " not accepted");
  if (round == 0) return 0.0;
  const auto& rec = state_.proposals[state_.accepted[round]];
  return merge_coefficient(method, state_.score_window, round, *rec.finalize_time, rec.enqueue_time);
}

void Contract::write_event_log(std::ostream& out) const {
  for (const auto& e : state_.events) {
    nlohmann::json j{{"kind", e.kind}, {"proposal", e.proposal}, {"time", e.time}};
    j["node"] = e.node ? nlohmann::json(*e.node) : nlohmann::json(nullptr);
    out << j.dump() << '\n';
  }
}

}  // namespace frain
