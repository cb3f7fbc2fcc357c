#pragma once

#include <vector>

#include "bfa/known_leader.hpp"
#include "bfa/meeting.hpp"

namespace bfa {

/// Leader election with simultaneous spanning tree construction, knowing only lambda.
///
/// Rounds are grouped into aligned windows of 4L rounds. At the start of each
/// window an agent picks one port: its next unexplored port, or the next child
/// on its chain to poll for completion, or none (host). It then follows its
/// MeetingId schedule toward that port, which guarantees at least one meeting
/// with the neighbor's resident during the window.
///
/// A meeting between a resident and the visitors at its node is resolved the
/// same way by every participant:
///   - if some visitor has a smaller treelabel, the resident joins the visitor
///     with the smallest (treelabel, id);
///   - otherwise, if some visitor has a larger treelabel, the visitor with the
///     smallest id joins the resident;
///   - otherwise everyone is in one tree and the visit just serves its purpose
///     (an explored port is settled, a polled child's completion is read).
/// Joining an agent means taking its treelabel, pointing parent at it, being
/// prepended to its child chain, dropping one's own children and restarting
/// exploration of every non-parent port. Labels only decrease, so the tree of
/// the smallest id absorbs everything.
class ElectionProgram final : public AgentProgram {
 public:
  explicit ElectionProgram(AgentId lambda);
  std::string name() const override { return "election"; }
  StepResult step(const AgentState& self, Peers peers, const StepContext& ctx) const override;
  bool local_done(const AgentState& self) const override { return self.completion; }
  bool terminator(std::span<const AgentState> agents) const override;

 private:
  AgentId lambda_;
  std::uint32_t retry_cap_;
};

/// Every agent starts as the leader of its own one-node tree.
Configuration election_start(const PortGraph& g, const Configuration& config);

struct ElectionStageResult {
  AgentId leader = 0;
  TreeEdgeSet tree;
  std::vector<AgentId> treelabels;
  RunResult run;
};

/// Only the label-merging stage. Throws RoundLimitExceeded.
ElectionStageResult run_election_stage(const PortGraph& g, const Configuration& config,
                                       const RunOptions& options = {});

struct ElectionResult {
  AgentId leader = 0;
  TreeEdgeSet election_tree;  // parent pointers when the merging stage ends
  std::vector<AgentId> treelabels;
  TreeEdgeSet tree;           // tree rebuilt from the elected leader; used afterwards
  std::vector<PartitionBit> partitions;
  AggregatePayload root_payload;
  std::vector<GraphKnowledge> knowledge;
  Round assignment_rounds = 0;
  RunReport report;
  Configuration final_config;
};

/// Election, then partition assignment and downcast of (n, |A|, |B|, Delta, 2m)
/// from the elected leader.
ElectionResult elect_leader_and_tree(const PortGraph& g, const Configuration& config,
                                     const RunOptions& options = {});

}  // namespace bfa
