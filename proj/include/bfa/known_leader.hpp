#pragma once

#include <vector>

#include "bfa/report.hpp"
#include "bfa/tree.hpp"

namespace bfa {

/// Partition assignment and spanning tree growth from a leader everyone knows.
///
/// Time is cut into two-round slots (leave, come back). Partitioned agents walk
/// their ports in ascending order, skipping the parent port; a resident that has
/// no partition yet takes the opposite of its discoverer's partition and records
/// the discovery port as parent. When several explorers arrive at once the one
/// with the smallest id is the discoverer. Each new child is prepended to the
/// discoverer's child chain through the child's sibling pointer. Once out of
/// ports, an agent polls its children along that chain, folding in each
/// completed child's AggregatePayload, and is complete after the last one.
class KnownLeaderProgram final : public AgentProgram {
 public:
  std::string name() const override { return "partition"; }
  StepResult step(const AgentState& self, Peers peers, const StepContext& ctx) const override;
  bool local_done(const AgentState& self) const override { return self.completion; }
  bool terminator(std::span<const AgentState> agents) const override;
};

/// Network facts the root learns and sends back down: n, |A|, |B|, Delta, 2m.
struct GraphKnowledge {
  std::uint64_t n = 0;
  std::uint64_t size0 = 0;  // agents with partition 0 (the leader's side)
  std::uint64_t size1 = 0;
  std::uint64_t max_degree = 0;
  std::uint64_t degree_sum = 0;

  std::vector<std::uint64_t> to_words() const { return {n, size0, size1, max_degree, degree_sum}; }
  static GraphKnowledge from_words(const std::vector<std::uint64_t>& words);
  static GraphKnowledge from_aggregate(const AggregatePayload& root);

  friend bool operator==(const GraphKnowledge&, const GraphKnowledge&) = default;
};

struct KnownLeaderResult {
  TreeEdgeSet tree;
  std::vector<PartitionBit> partitions;  // by agent index
  AggregatePayload root_payload;
  std::vector<GraphKnowledge> knowledge;  // what each agent holds after the downcast
  Round assignment_rounds = 0;            // rounds until the last agent had a partition
  RunReport report;
  Configuration final_config;
};

/// Prepares a configuration for the partition run: every agent forgets its tree
/// variables and the agent with leader_id becomes the known leader.
Configuration known_leader_start(const PortGraph& g, const Configuration& config, AgentId leader_id);

/// Throws std::invalid_argument when leader_id is not among the agents, and
/// RoundLimitExceeded if the construction stalls.
KnownLeaderResult known_leader_tree(const PortGraph& g, const Configuration& config, AgentId leader_id,
                                    const RunOptions& options = {});

}  // namespace bfa
