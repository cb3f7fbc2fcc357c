#include "bfa/meeting.hpp"

namespace bfa {

std::string MeetingId::to_string() const {
  std::string out;
  for (std::uint32_t i = length(); i-- > 0;) out.push_back(bit(i) ? '1' : '0');
  return out;
}

MeetingId make_meeting_id(AgentId id, AgentId lambda) {
  if (id > lambda) {
    throw std::invalid_argument("agent id " + std::to_string(id) + " exceeds lambda " + std::to_string(lambda));
  }
  MeetingId m;
  m.id_bits = bit_width_for(lambda);
  const std::uint64_t mask = (std::uint64_t{1} << m.id_bits) - 1;
  m.bits = (((~std::uint64_t{id}) & mask) << m.id_bits) | (std::uint64_t{id} & mask);
  return m;
}

std::vector<WindowStep> meeting_window(const AgentState& self, AgentId lambda, OptPort target) {
  if (target && *target >= self.home_degree) {
    throw IllegalPort("meeting target port " + std::to_string(*target) + " at a node of degree " +
                      std::to_string(self.home_degree));
  }
  const MeetingId mid = make_meeting_id(self.id, lambda);
  std::vector<WindowStep> steps;
  steps.reserve(2 * mid.length());
  for (std::uint32_t i = 0; i < mid.length(); ++i) {
    if (target && mid.bit(i)) {
      steps.push_back({WindowStep::Kind::Visit, target});
      steps.push_back({WindowStep::Kind::Return, std::nullopt});
    } else {
      steps.push_back({WindowStep::Kind::Stay, std::nullopt});
      steps.push_back({WindowStep::Kind::Stay, std::nullopt});
    }
  }
  return steps;
}

StepResult MeetingDemoProgram::step(const AgentState& self, Peers peers, const StepContext& ctx) const {
  StepResult out{self, std::nullopt};
  AgentState& s = out.next;
  if (s.scratch.payload.size() < 2) s.scratch.payload.resize(2, 0);
  const WindowSlot slot = window_slot(ctx.round, lambda_);

  if (slot.outbound) {
    if (s.scratch.target && make_meeting_id(s.id, lambda_).bit(slot.bit_index)) {
      s.excursion = s.scratch.target;
      out.move = s.scratch.target;
    }
  } else {
    if (!s.at_home()) {
      for (const AgentState* peer : peers) {
        if (peer->at_home() && s.scratch.payload[0] == 0) s.scratch.payload[0] = ctx.round - 1;
      }
      out.move = s.arrival_port;
      s.excursion.reset();
    } else if (!peers.empty() && s.scratch.payload[1] == 0) {
      s.scratch.payload[1] = ctx.round - 1;
    }
  }
  if (ctx.round >= window_length(lambda_)) s.scratch.delivered = true;
  return out;
}

MeetingDemoResult run_meeting_window(const PortGraph& g, const Configuration& config,
                                     const std::vector<OptPort>& targets, const RunOptions& options) {
  if (targets.size() != config.size()) throw std::invalid_argument("one target per agent required");
  Configuration start = config;
  for (std::size_t k = 0; k < start.size(); ++k) {
    AgentState& s = start.agents[k];
    if (targets[k] && *targets[k] >= g.degree(start.homes[k])) {
      throw IllegalPort("meeting target port " + std::to_string(*targets[k]) + " at a node of degree " +
                        std::to_string(g.degree(start.homes[k])));
    }
    s.scratch = Scratch{};
    s.scratch.target = targets[k];
    s.scratch.payload.assign(2, 0);
  }
  MeetingDemoProgram program(config.lambda);
  MeetingDemoResult result;
  result.run = run(g, start, program, options);
  for (std::size_t k = 0; k < start.size(); ++k) {
    const AgentState& s = result.run.agents[k];
    MeetingOutcome o;
    o.id = s.id;
    o.target = targets[k];
    if (s.scratch.payload[0] != 0) o.met_as_visitor = s.scratch.payload[0];
    if (s.scratch.payload[1] != 0) o.met_as_host = s.scratch.payload[1];
    result.agents.push_back(o);
  }
  return result;
}

}  // namespace bfa
