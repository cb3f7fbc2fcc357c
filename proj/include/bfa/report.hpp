#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bfa/runtime.hpp"

namespace bfa {

/// Rounds and memory for a pipeline made of one or more engine runs.
struct RunReport {
  Round rounds_total = 0;
  std::vector<std::pair<std::string, Round>> rounds_per_phase;  // in execution order
  std::map<AgentId, std::uint64_t> peak_memory_bits;
  std::map<AgentId, std::uint64_t> peak_state_bits;  // excluding neighbor tables and pair counters
  std::uint64_t trace_digest = 0;
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();

  void add_phase(const std::string& name, const RunResult& result);
  void append(const RunReport& other);

  Round phase_rounds(const std::string& name) const;
  std::uint64_t max_peak_bits() const;
  std::uint64_t max_peak_state_bits() const;

  nlohmann::ordered_json to_json() const;
};

}  // namespace bfa
