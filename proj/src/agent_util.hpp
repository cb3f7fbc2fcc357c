#pragma once

#include <cstdint>

#include "bfa/runtime.hpp"

namespace bfa::detail {

// Smallest port >= from that is not the parent port, or -1.
inline std::int64_t next_port(const AgentState& s, std::int64_t from) {
  for (std::int64_t p = from; p < static_cast<std::int64_t>(s.home_degree); ++p) {
    if (!s.parent || *s.parent != static_cast<Port>(p)) return p;
  }
  return -1;
}

inline const AgentState* resident_of(Peers peers) {
  for (const AgentState* peer : peers) {
    if (peer->at_home()) return peer;
  }
  return nullptr;
}

inline void leave_home(AgentState& s, StepResult& out, Port port) {
  s.excursion = port;
  out.move = port;
}

inline void come_back(AgentState& s, StepResult& out) {
  out.move = s.arrival_port;
  s.excursion.reset();
}

}  // namespace bfa::detail
