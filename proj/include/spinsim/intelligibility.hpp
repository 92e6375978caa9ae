#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "spinsim/audiogram.hpp"
#include "spinsim/enhancer.hpp"
#include "spinsim/hearing_loss.hpp"
#include "spinsim/render.hpp"

namespace spinsim {

// Short-time envelope correlation between a clean reference and a degraded
// signal: both are resampled to 10 kHz, time-aligned, analysed in
// one-third-octave bands, and correlated over 384 ms segments. Returns the
// mean correlation, in [-1, 1]; identical signals give 1.
double envelope_metric(std::span<const double> reference, std::span<const double> degraded,
                       double sample_rate);

struct LogisticMap {
  double slope = 10.0;
  double midpoint = 0.55;

  void validate() const;
};

nlohmann::json logistic_to_json(const LogisticMap& m);
LogisticMap logistic_from_json(const nlohmann::json& j);

// Map a metric value to a predicted intelligibility score in (0, 1).
double map_to_intelligibility(double metric, const LogisticMap& map);

// Least-squares fit of the logistic map to (metric, measured score) pairs.
// Needs at least 10 pairs spanning a metric range of 0.2 or more.
LogisticMap fit_logistic(const std::vector<std::pair<double, double>>& pairs);

struct IntelligibilityScore {
  std::string scene_id;
  std::string listener_id;
  double metric = 0.0;  // better-ear envelope correlation after loss simulation
  double score = 0.0;   // predicted proportion of words correct
};

// Better-ear prediction: each enhanced ear is passed through the listener's
// hearing loss simulation, compared against the scene reference, and the
// higher correlation is mapped through the logistic. Transcripts are not
// consulted.
IntelligibilityScore predict_intelligibility(const SpinSignalSet& scene,
                                             const EnhancedOutput& enhanced,
                                             const Audiogram& audiogram,
                                             const LogisticMap& map,
                                             const HearingLossConfig& loss_config = {});

}  // namespace spinsim
