#pragma once

#include <cstdint>

namespace bfa {

// Measured constants for the election bounds, fixed after running the
// acceptance sweep with some headroom.
inline constexpr double kElectionRoundConstant = 10;  // rounds <= c * n * L
inline constexpr double kElectionStateConstant = 48;  // per-agent state bits <= c' * L

}  // namespace bfa
