#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bfa/runtime.hpp"

namespace bfa {

/// Schedule string for the adjacent-agent meeting protocol: the low L bits are
/// the zero-padded id, the high L bits its complement. Exactly L bits are set.
struct MeetingId {
  std::uint32_t id_bits = 1;  // L
  std::uint64_t bits = 0;     // 2L significant bits

  /// Bit i counted from the least significant end, 0 <= i < 2L.
  bool bit(std::uint32_t i) const { return (bits >> i) & 1u; }
  std::uint32_t length() const { return 2 * id_bits; }
  /// Most significant bit first, e.g. "11010010".
  std::string to_string() const;
};

/// Throws std::invalid_argument when id > lambda.
MeetingId make_meeting_id(AgentId id, AgentId lambda);

/// Rounds in one aligned meeting window: 4L.
inline std::uint32_t window_length(AgentId lambda) { return 4 * bit_width_for(lambda); }

struct WindowSlot {
  std::uint32_t bit_index = 0;  // which MeetingId bit governs this round
  bool outbound = true;         // first round of the pair: maybe leave; second: come back
};

/// Position of a 1-based round inside its window.
inline WindowSlot window_slot(Round round, AgentId lambda) {
  const auto j = static_cast<std::uint32_t>((round - 1) % window_length(lambda));
  return {j / 2, j % 2 == 0};
}

struct WindowStep {
  enum class Kind : std::uint8_t { Stay, Visit, Return };
  Kind kind = Kind::Stay;
  OptPort port;
  friend bool operator==(const WindowStep&, const WindowStep&) = default;
};

/// The 4L per-round actions of one window for an agent at home. With no
/// target the agent hosts for the whole window. Throws IllegalPort when
/// target >= home degree.
std::vector<WindowStep> meeting_window(const AgentState& self, AgentId lambda, OptPort target);

/// One aligned window in which every agent with a target visits it according to
/// its MeetingId, and every agent hosts whenever it stays.
class MeetingDemoProgram final : public AgentProgram {
 public:
  explicit MeetingDemoProgram(AgentId lambda) : lambda_(lambda) {}
  std::string name() const override { return "meeting"; }
  StepResult step(const AgentState& self, Peers peers, const StepContext& ctx) const override;
  bool local_done(const AgentState& self) const override { return self.scratch.delivered; }

 private:
  AgentId lambda_;
};

struct MeetingOutcome {
  AgentId id = 0;
  OptPort target;
  std::optional<Round> met_as_visitor;  // window round of the outbound move that met the target's resident
  std::optional<Round> met_as_host;     // window round of the first visitor arrival at home
};

struct MeetingDemoResult {
  std::vector<MeetingOutcome> agents;  // by agent index
  RunResult run;
};

/// targets[k] is the port agent k tries to meet through (or none to host).
MeetingDemoResult run_meeting_window(const PortGraph& g, const Configuration& config,
                                     const std::vector<OptPort>& targets, const RunOptions& options = {});

}  // namespace bfa
