#include "bfa/election.hpp"

#include <algorithm>

#include "agent_util.hpp"

namespace bfa {

using detail::come_back;
using detail::leave_home;
using detail::next_port;
using detail::resident_of;

namespace {

struct Resolution {
  enum class Kind { None, ResidentAdopts, VisitorJoins };
  Kind kind = Kind::None;
  const AgentState* winner = nullptr;
};

Resolution resolve(const AgentState& resident, std::span<const AgentState* const> visitors) {
  const AgentState* smaller = nullptr;
  const AgentState* larger = nullptr;
  for (const AgentState* v : visitors) {
    if (v->treelabel < resident.treelabel) {
      if (!smaller || std::pair(v->treelabel, v->id) < std::pair(smaller->treelabel, smaller->id)) smaller = v;
    } else if (v->treelabel > resident.treelabel) {
      if (!larger || v->id < larger->id) larger = v;
    }
  }
  if (smaller) return {Resolution::Kind::ResidentAdopts, smaller};
  if (larger) return {Resolution::Kind::VisitorJoins, larger};
  return {};
}

void adopt(AgentState& s, AgentId label, Port parent, OptPort sibling) {
  s.treelabel = label;
  s.parent = parent;
  s.sibling = sibling;
  s.child.reset();
  s.scratch.child_count = 0;
  s.completion = false;
  s.leader = false;
  s.nextport = next_port(s, 0);
  s.scratch.cursor.reset();
  s.scratch.observed_sibling.reset();
  s.scratch.outcome = WindowOutcome::Absorbed;
}

void add_child(AgentState& s, Port port) {
  s.child = port;
  ++s.scratch.child_count;
  s.completion = false;
  if (s.nextport < 0 && s.scratch.outcome != WindowOutcome::Absorbed) s.scratch.outcome = WindowOutcome::Restart;
}

void settle_window(AgentState& s, std::uint32_t retry_cap) {
  Scratch& w = s.scratch;
  switch (w.outcome) {
    case WindowOutcome::Absorbed:
      break;
    case WindowOutcome::Restart:
      w.cursor = s.child;
      break;
    case WindowOutcome::Resolved:
      s.nextport = next_port(s, s.nextport + 1);
      if (s.nextport < 0) w.cursor = s.child;
      break;
    case WindowOutcome::ChildComplete:
      w.cursor = w.observed_sibling;
      break;
    case WindowOutcome::Pending:
      // Waiting on a child's completion is normal; only unanswered exploration counts.
      if (w.target && s.nextport >= 0 && ++w.retries > retry_cap) {
        throw RoundLimitExceeded("election: agent " + std::to_string(s.id) + " failed to settle port " +
                                 std::to_string(*w.target) + " in " + std::to_string(retry_cap) + " windows");
      }
      break;
  }
  if (w.outcome != WindowOutcome::Pending) w.retries = 0;
  w.outcome = WindowOutcome::Pending;
  w.observed_sibling.reset();
  w.target.reset();
}

void choose_target(AgentState& s) {
  if (s.nextport >= 0) {
    s.scratch.target = static_cast<Port>(s.nextport);
  } else if (!s.completion) {
    if (s.scratch.cursor) {
      s.scratch.target = s.scratch.cursor;
    } else {
      s.completion = true;
    }
  }
}

void meet_as_resident(AgentState& s, Peers visitors) {
  const Resolution r = resolve(s, visitors);
  if (r.kind == Resolution::Kind::ResidentAdopts) {
    adopt(s, r.winner->treelabel, *r.winner->arrival_port, r.winner->child);
  } else if (r.kind == Resolution::Kind::VisitorJoins) {
    add_child(s, *r.winner->arrival_port);
  }
}

void meet_as_visitor(const AgentState& self, AgentState& s, const AgentState& resident, Peers peers) {
  std::vector<const AgentState*> visitors;
  visitors.reserve(peers.size());
  for (const AgentState* p : peers) {
    if (p != &resident) visitors.push_back(p);
  }
  visitors.push_back(&self);
  const Resolution r = resolve(resident, visitors);
  const bool exploring = s.nextport >= 0;

  if (r.kind == Resolution::Kind::ResidentAdopts) {
    if (r.winner->id != self.id) return;
    add_child(s, *s.excursion);
    if (exploring && s.scratch.outcome == WindowOutcome::Pending) s.scratch.outcome = WindowOutcome::Resolved;
    return;
  }
  if (r.kind == Resolution::Kind::VisitorJoins) {
    if (r.winner->id == self.id) adopt(s, resident.treelabel, *s.excursion, resident.child);
    return;
  }
  if (s.scratch.outcome != WindowOutcome::Pending) return;
  if (exploring) {
    s.scratch.outcome = WindowOutcome::Resolved;
    return;
  }
  if (s.scratch.cursor && *s.scratch.cursor == *s.excursion) {
    if (resident.parent != s.arrival_port) {
      throw std::logic_error("election: agent " + std::to_string(self.id) + " polled agent " +
                             std::to_string(resident.id) + " which is not its child");
    }
    if (resident.completion) {
      s.scratch.outcome = WindowOutcome::ChildComplete;
      s.scratch.observed_sibling = resident.sibling;
    }
  }
}

}  // namespace

ElectionProgram::ElectionProgram(AgentId lambda) : lambda_(lambda), retry_cap_(lambda + 2) {}

StepResult ElectionProgram::step(const AgentState& self, Peers peers, const StepContext& ctx) const {
  StepResult out{self, std::nullopt};
  AgentState& s = out.next;
  const WindowSlot slot = window_slot(ctx.round, lambda_);

  if (slot.outbound) {
    if (slot.bit_index == 0) {
      if (ctx.round > 1) settle_window(s, retry_cap_);
      choose_target(s);
    }
    if (s.scratch.target && make_meeting_id(s.id, lambda_).bit(slot.bit_index)) leave_home(s, out, *s.scratch.target);
    return out;
  }

  if (s.at_home()) {
    if (!peers.empty()) meet_as_resident(s, peers);
  } else {
    if (const AgentState* resident = resident_of(peers)) meet_as_visitor(self, s, *resident, peers);
    come_back(s, out);
  }
  return out;
}

bool ElectionProgram::terminator(std::span<const AgentState> agents) const {
  return std::count_if(agents.begin(), agents.end(), [](const AgentState& s) { return s.leader && s.completion; }) == 1;
}

Configuration election_start(const PortGraph& g, const Configuration& config) {
  Configuration start = config;
  for (std::size_t k = 0; k < start.size(); ++k) {
    AgentState& s = start.agents[k];
    if (!s.at_home()) throw std::logic_error("election starts with every agent home");
    if (s.id > config.lambda) throw std::invalid_argument("agent id exceeds lambda");
    s.treelabel = s.id;
    s.leader = true;
    s.partition = PartitionBit::Unset;
    s.parent.reset();
    s.child.reset();
    s.sibling.reset();
    s.completion = false;
    s.home_degree = g.degree(start.homes[k]);
    s.scratch = Scratch{};
    s.nextport = next_port(s, 0);
  }
  return start;
}

ElectionStageResult run_election_stage(const PortGraph& g, const Configuration& config, const RunOptions& options) {
  const Configuration start = election_start(g, config);
  ElectionProgram program(config.lambda);
  ElectionStageResult result;
  result.run = run(g, start, program, options);
  for (const auto& s : result.run.agents) {
    result.treelabels.push_back(s.treelabel);
    if (s.leader && s.completion) result.leader = s.id;
  }
  result.tree = tree_from_agents(result.run.agents);
  return result;
}

ElectionResult elect_leader_and_tree(const PortGraph& g, const Configuration& config, const RunOptions& options) {
  ElectionResult result;
  const ElectionStageResult stage = run_election_stage(g, config, options);
  result.leader = stage.leader;
  result.election_tree = stage.tree;
  result.treelabels = stage.treelabels;
  result.report.add_phase("election", stage.run);

  RunOptions next = options;
  next.round_offset = options.round_offset + stage.run.rounds;
  const Configuration after = continue_from(election_start(g, config), stage.run);
  KnownLeaderResult built = known_leader_tree(g, after, stage.leader, next);
  result.tree = std::move(built.tree);
  result.partitions = std::move(built.partitions);
  result.root_payload = built.root_payload;
  result.knowledge = std::move(built.knowledge);
  result.assignment_rounds = built.assignment_rounds;
  result.report.append(built.report);
  result.final_config = std::move(built.final_config);
  result.report.outputs["leader"] = stage.leader;
  return result;
}

}  // namespace bfa
