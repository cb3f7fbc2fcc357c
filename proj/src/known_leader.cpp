#include "bfa/known_leader.hpp"

#include <algorithm>

#include "agent_util.hpp"

namespace bfa {

using detail::come_back;
using detail::leave_home;
using detail::next_port;
using detail::resident_of;

StepResult KnownLeaderProgram::step(const AgentState& self, Peers peers, const StepContext& ctx) const {
  StepResult out{self, std::nullopt};
  AgentState& s = out.next;

  if (ctx.round % 2 == 1) {
    if (s.partition == PartitionBit::Unset || s.completion) return out;
    if (s.nextport >= 0) {
      s.scratch.target = static_cast<Port>(s.nextport);
    } else if (s.scratch.cursor) {
      s.scratch.target = s.scratch.cursor;
    } else {
      s.completion = true;
      s.scratch.target.reset();
      return out;
    }
    leave_home(s, out, *s.scratch.target);
    return out;
  }

  if (s.at_home()) {
    if (s.partition != PartitionBit::Unset) return out;
    const AgentState* discoverer = nullptr;
    for (const AgentState* peer : peers) {
      if (!peer->at_home() && peer->partition != PartitionBit::Unset) {
        discoverer = peer;
        break;  // peers are in ascending id order
      }
    }
    if (!discoverer) return out;
    s.partition = opposite(discoverer->partition);
    s.parent = discoverer->arrival_port;
    s.sibling = discoverer->child;
    s.leader = false;
    s.scratch.payload = AggregatePayload::own(s.home_degree, s.partition).to_words();
    s.nextport = next_port(s, 0);
    if (s.nextport < 0) s.scratch.cursor = s.child;
    return out;
  }

  const AgentState* resident = resident_of(peers);
  if (s.nextport >= 0) {
    if (resident && resident->partition == PartitionBit::Unset) {
      bool first = true;
      for (const AgentState* peer : peers) {
        if (!peer->at_home() && peer->partition != PartitionBit::Unset && peer->id < s.id) first = false;
      }
      if (first) {
        s.child = s.excursion;
        ++s.scratch.child_count;
      }
    }
    s.nextport = next_port(s, s.nextport + 1);
    if (s.nextport < 0) s.scratch.cursor = s.child;
  } else if (resident && resident->completion && resident->parent == s.arrival_port) {
    combine_aggregate(s.scratch.payload, resident->scratch.payload);
    s.scratch.cursor = resident->sibling;
  }
  come_back(s, out);
  return out;
}

bool KnownLeaderProgram::terminator(std::span<const AgentState> agents) const {
  return std::any_of(agents.begin(), agents.end(), [](const AgentState& s) { return s.leader && s.completion; });
}

GraphKnowledge GraphKnowledge::from_words(const std::vector<std::uint64_t>& words) {
  GraphKnowledge k;
  if (words.size() >= 5) {
    k.n = words[0];
    k.size0 = words[1];
    k.size1 = words[2];
    k.max_degree = words[3];
    k.degree_sum = words[4];
  }
  return k;
}

GraphKnowledge GraphKnowledge::from_aggregate(const AggregatePayload& root) {
  return {root.count0 + root.count1, root.count0, root.count1, root.max_degree, root.degree_sum};
}

Configuration known_leader_start(const PortGraph& g, const Configuration& config, AgentId leader_id) {
  Configuration start = config;
  bool found = false;
  for (std::size_t k = 0; k < start.size(); ++k) {
    AgentState& s = start.agents[k];
    if (!s.at_home()) throw std::logic_error("partition run starts with every agent home");
    s.partition = PartitionBit::Unset;
    s.parent.reset();
    s.child.reset();
    s.sibling.reset();
    s.nextport = -1;
    s.completion = false;
    s.leader = s.id == leader_id;
    s.home_degree = g.degree(start.homes[k]);
    s.scratch = Scratch{};
    if (s.leader) {
      found = true;
      s.partition = PartitionBit::Zero;
      s.scratch.payload = AggregatePayload::own(s.home_degree, s.partition).to_words();
      s.nextport = next_port(s, 0);
    }
  }
  if (!found) throw std::invalid_argument("leader id " + std::to_string(leader_id) + " is not among the agents");
  return start;
}

KnownLeaderResult known_leader_tree(const PortGraph& g, const Configuration& config, AgentId leader_id,
                                    const RunOptions& options) {
  const Configuration start = known_leader_start(g, config, leader_id);

  KnownLeaderResult result;
  RunOptions opts = options;
  opts.observer = [&](Round round, std::span<const AgentState> agents, std::span<const NodeIndex> positions) {
    if (result.assignment_rounds == 0 &&
        std::none_of(agents.begin(), agents.end(), [](const AgentState& s) { return s.partition == PartitionBit::Unset; })) {
      result.assignment_rounds = round;
    }
    if (options.observer) options.observer(round, agents, positions);
  };
  KnownLeaderProgram program;
  const RunResult built = run(g, start, program, opts);
  result.report.add_phase("partition", built);

  for (const auto& s : built.agents) {
    result.partitions.push_back(s.partition);
    if (s.leader) result.root_payload = AggregatePayload::from_words(s.scratch.payload, s.completion);
  }
  result.tree = tree_from_agents(built.agents);

  const Configuration after_build = continue_from(start, built);
  opts = options;
  opts.round_offset = options.round_offset + built.rounds;
  const GraphKnowledge facts = GraphKnowledge::from_aggregate(result.root_payload);
  const BroadcastResult down = broadcast_down(g, after_build, result.tree, facts.to_words(), opts);
  result.report.add_phase("downcast", down.run);
  for (const auto& words : down.values) result.knowledge.push_back(GraphKnowledge::from_words(words));

  // Tree variables stay as built; scratch now holds the downcast knowledge.
  result.final_config = continue_from(after_build, down.run);
  result.report.outputs["leader"] = leader_id;
  result.report.outputs["partition_sizes"] = {facts.size0, facts.size1};
  result.report.outputs["assignment_rounds"] = result.assignment_rounds;
  return result;
}

}  // namespace bfa
