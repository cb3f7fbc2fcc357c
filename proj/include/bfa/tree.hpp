#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bfa/runtime.hpp"

namespace bfa {

/// Rooted spanning tree stored the way agents store it: each agent keeps the
/// port of its home that leads to its parent. Indexed by agent (= home node).
struct TreeEdgeSet {
  std::vector<OptPort> parent;

  std::size_t size() const { return parent.size(); }
  std::size_t edge_count() const;
  /// The unique agent without a parent. Throws InvalidTree if there is not exactly one.
  NodeIndex root() const;
};

/// Throws InvalidTree unless the parent ports form a spanning tree of g.
void require_valid_tree(const PortGraph& g, const TreeEdgeSet& tree);

/// Per node, the ports leading to its children, ascending.
std::vector<std::vector<Port>> child_ports(const PortGraph& g, const TreeEdgeSet& tree);

/// Hop distance from each node to the root.
std::vector<std::uint32_t> node_depths(const PortGraph& g, const TreeEdgeSet& tree);
std::uint32_t tree_depth(const PortGraph& g, const TreeEdgeSet& tree);

TreeEdgeSet tree_from_agents(const std::vector<AgentState>& agents);

/// Subtree summary carried upward during tree construction.
struct AggregatePayload {
  std::uint64_t degree_sum = 0;
  std::uint64_t count0 = 0;
  std::uint64_t count1 = 0;
  std::uint64_t max_degree = 0;
  bool completion = false;

  std::vector<std::uint64_t> to_words() const { return {degree_sum, count0, count1, max_degree}; }
  static AggregatePayload from_words(const std::vector<std::uint64_t>& words, bool completion = true);
  static AggregatePayload own(std::uint32_t degree, PartitionBit partition);

  friend bool operator==(const AggregatePayload&, const AggregatePayload&) = default;
};

/// Folds a child's words into the accumulator.
using CombineRule = std::function<void(std::vector<std::uint64_t>& acc, const std::vector<std::uint64_t>& child)>;

void combine_sum(std::vector<std::uint64_t>& acc, const std::vector<std::uint64_t>& child);
/// Sums every word except the last, which takes the maximum (AggregatePayload layout).
void combine_aggregate(std::vector<std::uint64_t>& acc, const std::vector<std::uint64_t>& child);

/// Children walk to their parent (which hosts) once every child of theirs has
/// reported, hand over their subtree value and walk back: two rounds per level.
class ConvergecastProgram final : public AgentProgram {
 public:
  explicit ConvergecastProgram(CombineRule rule) : rule_(std::move(rule)) {}
  std::string name() const override { return "convergecast"; }
  StepResult step(const AgentState& self, Peers peers, const StepContext& ctx) const override;
  bool local_done(const AgentState& self) const override;

 private:
  CombineRule rule_;
};

/// Uninformed agents oscillate to their parent and back every two rounds;
/// informed agents stay home, so depth t is informed after 2t rounds.
class BroadcastDownProgram final : public AgentProgram {
 public:
  std::string name() const override { return "broadcast_down"; }
  StepResult step(const AgentState& self, Peers peers, const StepContext& ctx) const override;
  bool local_done(const AgentState& self) const override { return self.scratch.informed && self.at_home(); }
};

struct ConvergecastResult {
  std::vector<std::uint64_t> root_value;
  Round rounds = 0;
  RunResult run;
};

struct BroadcastResult {
  std::vector<std::vector<std::uint64_t>> values;  // by agent index
  Round rounds = 0;
  RunResult run;
};

/// values[k] is agent k's own contribution. Throws InvalidTree.
ConvergecastResult convergecast(const PortGraph& g, const Configuration& config, const TreeEdgeSet& tree,
                                const std::vector<std::vector<std::uint64_t>>& values, const CombineRule& rule,
                                const RunOptions& options = {});

/// The root starts with value; returns when every agent holds it. Throws InvalidTree.
BroadcastResult broadcast_down(const PortGraph& g, const Configuration& config, const TreeEdgeSet& tree,
                               const std::vector<std::uint64_t>& value, const RunOptions& options = {});

}  // namespace bfa
