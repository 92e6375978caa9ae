#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "spinsim/audiogram.hpp"
#include "spinsim/render.hpp"

namespace spinsim {

inline constexpr double kMaxLookaheadMs = 5.0;

struct ProcessorConfig {
  // Interior crossover frequencies of the filterbank; bands map one-to-one
  // onto the audiogram frequencies for gain lookup.
  std::vector<double> crossover_hz = {353.553390593273762, 707.106781186547524,
                                      1414.21356237309505, 2828.42712474619010,
                                      5656.85424949238020};
  std::size_t fir_taps = 129;
  double attack_ms = 5.0;
  double release_ms = 50.0;
  double lookahead_ms = 1.0;
  double threshold_dbfs = -30.0;   // compression knee, RMS level
  double compression_ratio = 2.0;  // applied above the knee

  void validate() const;
};

nlohmann::json processor_config_to_json(const ProcessorConfig& c);
ProcessorConfig processor_config_from_json(const nlohmann::json& j);

struct EnhancedOutput {
  std::string scene_id;
  std::string listener_id;
  double sample_rate = 0.0;
  std::vector<double> left;
  std::vector<double> right;
  long latency_samples = 0;  // filterbank group delay

  const std::vector<double>& ear(Ear e) const { return e == Ear::left ? left : right; }
};

// Multiband compressor fitted to the listener: microphones are averaged per
// ear, split into bands, and each band gets its prescribed gain plus
// level-dependent compression. Uses no lookahead beyond config.lookahead_ms.
EnhancedOutput enhance(const SpinSignalSet& scene, const ProcessorConfig& config,
                       const Audiogram& audiogram);

// Front microphones passed through untouched; the null processor.
EnhancedOutput passthrough(const SpinSignalSet& scene, const Audiogram& audiogram);

}  // namespace spinsim
