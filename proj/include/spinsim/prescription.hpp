#pragma once

#include <array>

#include "spinsim/audiogram.hpp"

namespace spinsim {

inline constexpr double kMaxInsertionGainDb = 40.0;

// Linear insertion gains per audiogram frequency for one ear, derived from
// the classic half-gain style rule: a three-frequency average term plus a
// per-frequency term and a fixed frequency-dependent correction, floored at
// zero and capped at kMaxInsertionGainDb.
std::array<double, 6> prescribe_gains(const Audiogram& audiogram, Ear ear);

}  // namespace spinsim
