#pragma once

// Simulated scoring contract and content-addressed model store.
//
// The contract is a single-writer state machine. Each proposal moves
// Committing -> Revealing -> (Accepted | Rejected); accepted proposals get
// consecutive round numbers starting at 0 and their consensus score goes into
// the ScoreWindow that all nodes use to derive mixing coefficients.

#include "frain/digest.hpp"
#include "frain/merge.hpp"
#include "frain/mixing.hpp"
#include "frain/param_vec.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace frain {

using NodeId = std::uint64_t;
using ProposalId = std::uint64_t;
using Salt = std::array<std::uint8_t, 16>;

/// Content store standing in for IPFS: digest -> model.
class ContentStore {
 public:
  /// Stores the model under its own digest. Re-putting identical content is a no-op.
  ModelDigest put(const ParamVec& model);

  /// Stores a model that arrived with a claimed digest; rejects mismatches.
  void put(const ModelDigest& claimed, const ParamVec& model);

  bool contains(const ModelDigest& d) const { return blobs_.count(d) != 0; }
  const ParamVec& get(const ModelDigest& d) const;
  std::size_t size() const noexcept { return blobs_.size(); }

 private:
  std::unordered_map<ModelDigest, ParamVec, Digest32Hash> blobs_;
};

enum class ProposalStatus { committing, revealing, accepted, rejected };
std::string to_string(ProposalStatus s);

struct ProposalRecord {
  ProposalId id = 0;
  ModelDigest digest;
  NodeId proposer = 0;
  double enqueue_time = 0.0;  // tau
  ProposalStatus status = ProposalStatus::committing;
  std::vector<NodeId> committee;
  double commit_deadline = 0.0;
  double reveal_deadline = 0.0;  // set when the proposal enters Revealing
  std::optional<std::size_t> round;
  std::optional<double> score;          // consensus median, when finalized with reveals
  std::optional<double> finalize_time;

  friend bool operator==(const ProposalRecord&, const ProposalRecord&) = default;
};

struct Commitment {
  NodeId node = 0;
  Digest32 sealed;
  friend bool operator==(const Commitment&, const Commitment&) = default;
};

struct ContractEvent {
  std::string kind;
  ProposalId proposal = 0;
  std::optional<NodeId> node;
  double time = 0.0;
  friend bool operator==(const ContractEvent&, const ContractEvent&) = default;
};

struct ContractConfig {
  std::size_t num_nodes = 21;
  std::size_t committee_size = 5;
  std::size_t window = 4;
  double threshold = 0.2;
  std::uint64_t rng_seed = 0;
  double commit_window = 1.0;  // time after enqueue during which commits are accepted
  double reveal_window = 1.0;  // time after entering Revealing during which reveals are accepted
};

struct ContractState {
  ContractConfig config;
  std::vector<ProposalRecord> proposals;
  std::map<std::pair<ProposalId, NodeId>, Commitment> commitments;
  std::map<std::pair<ProposalId, NodeId>, double> reveals;
  std::set<NodeId> flagged;
  ScoreWindow score_window;
  std::vector<ProposalId> accepted;  // proposal id per accepted round
  std::vector<ContractEvent> events;

  explicit ContractState(const ContractConfig& cfg);
};

bool operator==(const ContractState& a, const ContractState& b);

enum class ContractErrc {
  unknown_digest,
  unknown_proposal,
  phase_violation,
  not_in_committee,
  duplicate_commit,
  duplicate_reveal,
  missing_commitment,
  reveal_mismatch,
  deadline_passed,
  invalid_score,
  committee_too_large,
};

class ContractError : public std::runtime_error {
 public:
  ContractError(ContractErrc code, const std::string& what) : std::runtime_error(what), code(code) {}
  ContractErrc code;
};

/// SHA-256 over (binary64 LE score || 16-byte salt || u64 LE node id).
Digest32 seal_score(double score, const Salt& salt, NodeId node);

/// Median with the even-count rule: mean of the two middle values.
double median(std::vector<double> values);

/// Deterministic committee for a proposal: sample without replacement from
/// every node except the proposer, seeded by (rng_seed, proposal id).
std::vector<NodeId> select_committee(std::uint64_t rng_seed, ProposalId id, NodeId proposer, std::size_t num_nodes,
                                     std::size_t committee_size);

struct FinalizeOutcome {
  double median = 0.0;
  bool accepted = false;
  std::optional<std::size_t> round;
  std::size_t reveal_count = 0;
};

class Contract {
 public:
  explicit Contract(const ContractConfig& config);

  ProposalId submit_proposal(const ContentStore& store, const ModelDigest& digest, NodeId proposer, double now);

  /// Committee recorded at submission; equals select_committee for this proposal.
  const std::vector<NodeId>& committee(ProposalId id) const;

  void commit_score(ProposalId id, NodeId node, const Digest32& sealed, double now);
  void reveal_score(ProposalId id, NodeId node, double score, const Salt& salt, double now);

  /// Applies deadlines: Committing proposals past their commit window move to
  /// Revealing. Returns ids whose reveal window has closed and are ready to finalize.
  std::vector<ProposalId> advance_time(double now);

  /// True when every committed member has revealed.
  bool all_revealed(ProposalId id) const;

  FinalizeOutcome finalize(ProposalId id, double now);

  const ContractState& state() const noexcept { return state_; }
  const ProposalRecord& proposal(ProposalId id) const;
  const ScoreWindow& score_window() const noexcept { return state_.score_window; }

  /// Decayed coefficient frozen at each accepted round's finalize time.
  double frozen_alpha(std::size_t round, const MergeMethod& method) const;

  void write_event_log(std::ostream& out) const;

 private:
  ProposalRecord& mutable_proposal(ProposalId id);
  void log(const std::string& kind, ProposalId id, std::optional<NodeId> node, double time);
  void enter_revealing(ProposalRecord& rec, double now);

  ContractState state_;
};

}  // namespace frain
