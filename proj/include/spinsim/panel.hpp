#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spinsim/audiogram.hpp"
#include "spinsim/csv.hpp"
#include "spinsim/enhancer.hpp"
#include "spinsim/render.hpp"
#include "spinsim/rng.hpp"

namespace spinsim {

// Proportion of the speech expected to be audible to this listener:
// band-wise effective SNR (projection of the enhanced signal onto the
// reference) combined with audibility above the listener's thresholds.
// Unlike the envelope-correlation predictor this works directly from
// band levels, so the two models fail in different ways.
double audibility_index(const SpinSignalSet& scene, const EnhancedOutput& enhanced,
                        const Audiogram& audiogram);

struct PanelConfig {
  double word_noise_kappa = 20.0;  // concentration of per-trial variability
  std::uint64_t response_seed = 0;

  void validate() const;
};

struct PanelResponse {
  std::string scene_id;
  std::string listener_id;
  int words_total = 0;
  int words_correct = 0;

  double proportion() const {
    return words_total > 0 ? static_cast<double>(words_correct) / words_total : 0.0;
  }
};

// One listening trial: the underlying audibility sets the success
// probability, a Beta draw adds trial-to-trial variability, and each
// transcript word is scored correct or not.
PanelResponse simulate_response(const SpinSignalSet& scene, const EnhancedOutput& enhanced,
                                const Audiogram& audiogram, Rng& rng, double kappa = 20.0);

using EnhancedProvider =
    std::function<EnhancedOutput(const std::string& scene_id, const std::string& listener_id)>;

// Measured intelligibility table over scenes x listeners with columns
// scene_id, listener_id, si_measured.
csv::Table panel_measure(const std::vector<SpinSignalSet>& scenes,
                         const std::vector<Audiogram>& listeners,
                         const EnhancedProvider& provider, const PanelConfig& config);

}  // namespace spinsim
