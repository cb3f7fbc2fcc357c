#include "bfa/report.hpp"

#include <algorithm>
#include <cstdio>

namespace bfa {

void RunReport::add_phase(const std::string& name, const RunResult& result) {
  rounds_per_phase.emplace_back(name, result.rounds);
  rounds_total += result.rounds;
  for (std::size_t k = 0; k < result.agents.size(); ++k) {
    const AgentId id = result.agents[k].id;
    peak_memory_bits[id] = std::max(peak_memory_bits[id], result.peak_bits[k]);
    peak_state_bits[id] = std::max(peak_state_bits[id], result.peak_state_bits[k]);
  }
  trace_digest = trace_digest * 1099511628211ull ^ result.trace_digest;
}

void RunReport::append(const RunReport& other) {
  for (const auto& phase : other.rounds_per_phase) rounds_per_phase.push_back(phase);
  rounds_total += other.rounds_total;
  for (const auto& [id, bits] : other.peak_memory_bits) peak_memory_bits[id] = std::max(peak_memory_bits[id], bits);
  for (const auto& [id, bits] : other.peak_state_bits) peak_state_bits[id] = std::max(peak_state_bits[id], bits);
  trace_digest = trace_digest * 1099511628211ull ^ other.trace_digest;
  for (const auto& [key, value] : other.outputs.items()) outputs[key] = value;
}

Round RunReport::phase_rounds(const std::string& name) const {
  Round total = 0;
  for (const auto& [phase, rounds] : rounds_per_phase) {
    if (phase == name) total += rounds;
  }
  return total;
}

std::uint64_t RunReport::max_peak_bits() const {
  std::uint64_t best = 0;
  for (const auto& [id, bits] : peak_memory_bits) best = std::max(best, bits);
  return best;
}

std::uint64_t RunReport::max_peak_state_bits() const {
  std::uint64_t best = 0;
  for (const auto& [id, bits] : peak_state_bits) best = std::max(best, bits);
  return best;
}

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["rounds_total"] = rounds_total;
  j["rounds_per_phase"] = nlohmann::ordered_json::object();
  for (const auto& [phase, rounds] : rounds_per_phase) {
    j["rounds_per_phase"][phase] = j["rounds_per_phase"].value(phase, Round{0}) + rounds;
  }
  j["peak_memory_bits"] = nlohmann::ordered_json::object();
  for (const auto& [id, bits] : peak_memory_bits) j["peak_memory_bits"][std::to_string(id)] = bits;
  j["peak_state_bits"] = nlohmann::ordered_json::object();
  for (const auto& [id, bits] : peak_state_bits) j["peak_state_bits"][std::to_string(id)] = bits;
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(trace_digest));
  j["trace_digest"] = digest;
  j["outputs"] = outputs;
  return j;
}

}  // namespace bfa
