#pragma once

#include <array>
#include <span>
#include <vector>

#include "spinsim/audiogram.hpp"

namespace spinsim {

struct HearingLossConfig {
  bool recruitment = true;         // loudness recruitment via envelope expansion
  bool audibility_noise = true;    // internal noise anchored at the elevated threshold
  double audibility_noise_lift_db = 24.0;  // noise level above the elevated threshold
  double no_effect_floor_db = 10.0;  // thresholds at or below this attenuate nothing
  double envelope_tau_s = 0.008;   // envelope smoothing time constant
  double spl_offset_db = 91.0;     // dB SPL of a 0 dBFS signal; -26 dBFS maps to 65 dB SPL
  double recruitment_full_db = 100.0;  // SPL where loudness growth rejoins normal
};

// Zero-phase six-band split aligned with the audiogram frequencies; the
// bands sum back to the input exactly.
std::array<std::vector<double>, 6> split_audiogram_bands(std::span<const double> signal,
                                                         double sample_rate);

// Degrade a signal as heard through one ear of the given audiogram:
// per-band attenuation plus envelope expansion that grows with the loss.
std::vector<double> simulate_hearing_loss(std::span<const double> signal,
                                          const Audiogram& audiogram, Ear ear,
                                          double sample_rate,
                                          const HearingLossConfig& config = {});

}  // namespace spinsim
