#include "spinsim/prescription.hpp"

#include <algorithm>

namespace spinsim {

std::array<double, 6> prescribe_gains(const Audiogram& audiogram, Ear ear) {
  audiogram.validate();
  const std::array<double, 6>& hl = audiogram.ear(ear);
  // Corrections chosen so a zero-loss audiogram prescribes zero gain at
  // every frequency once the floor is applied.
  static constexpr std::array<double, 6> kCorrection = {-17.0, -8.0, 0.0, -1.0, -2.0, -3.0};
  const double three_freq_avg = (hl[1] + hl[2] + hl[3]) / 3.0;
  std::array<double, 6> gains{};
  for (std::size_t i = 0; i < gains.size(); ++i) {
    const double g = 0.15 * three_freq_avg + 0.31 * hl[i] + kCorrection[i];
    gains[i] = std::clamp(g, 0.0, kMaxInsertionGainDb);
  }
  return gains;
}

}  // namespace spinsim
