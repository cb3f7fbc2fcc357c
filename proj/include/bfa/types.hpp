#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace bfa {

using NodeIndex = std::uint32_t;
using Port = std::uint32_t;
using AgentId = std::uint32_t;
using Round = std::uint64_t;

using OptPort = std::optional<Port>;

// Ceil(log2(x + 1)), never less than 1: bits needed to hold values in [0, x].
inline std::uint32_t bit_width_for(std::uint64_t x) {
  std::uint32_t bits = 0;
  while (x != 0) {
    ++bits;
    x >>= 1;
  }
  return bits == 0 ? 1 : bits;
}

struct RoundLimitExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IllegalPort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotBipartite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OddSum : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidTree : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GraphFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bfa
