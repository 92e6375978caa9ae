#include "spinsim/enhancer.hpp"

#include <algorithm>
#include <cmath>

#include "spinsim/band_filter.hpp"
#include "spinsim/common.hpp"
#include "spinsim/dsp.hpp"
#include "spinsim/prescription.hpp"

namespace spinsim {

using namespace dsp;

void ProcessorConfig::validate() const {
  if (crossover_hz.size() + 1 != kAudiogramFreqs.size()) {
    throw InvalidArgumentError("processor needs one band per audiogram frequency");
  }
  for (std::size_t i = 0; i < crossover_hz.size(); ++i) {
    if (!(crossover_hz[i] > 0.0)) throw InvalidArgumentError("crossover frequencies must be positive");
    if (i > 0 && !(crossover_hz[i] > crossover_hz[i - 1])) {
      throw InvalidArgumentError("crossover frequencies must be ascending");
    }
  }
  if (fir_taps < 3 || fir_taps % 2 == 0) {
    throw InvalidArgumentError("filterbank tap count must be odd and >= 3");
  }
  if (!(attack_ms > 0.0) || !(release_ms > 0.0)) {
    throw InvalidArgumentError("attack and release must be positive");
  }
  if (!(lookahead_ms >= 0.0) || lookahead_ms > kMaxLookaheadMs) {
    throw InvalidArgumentError("lookahead must be in [0, 5] ms");
  }
  if (!(compression_ratio >= 1.0)) throw InvalidArgumentError("compression ratio must be >= 1");
  if (!(threshold_dbfs < 0.0)) throw InvalidArgumentError("compression threshold must be below full scale");
}

nlohmann::json processor_config_to_json(const ProcessorConfig& c) {
  return nlohmann::json{{"crossover_hz", c.crossover_hz},
                        {"fir_taps", c.fir_taps},
                        {"attack_ms", c.attack_ms},
                        {"release_ms", c.release_ms},
                        {"lookahead_ms", c.lookahead_ms},
                        {"threshold_dbfs", c.threshold_dbfs},
                        {"compression_ratio", c.compression_ratio}};
}

ProcessorConfig processor_config_from_json(const nlohmann::json& j) {
  try {
    ProcessorConfig c;
    if (j.contains("crossover_hz")) c.crossover_hz = j.at("crossover_hz").get<std::vector<double>>();
    c.fir_taps = j.value("fir_taps", c.fir_taps);
    c.attack_ms = j.value("attack_ms", c.attack_ms);
    c.release_ms = j.value("release_ms", c.release_ms);
    c.lookahead_ms = j.value("lookahead_ms", c.lookahead_ms);
    c.threshold_dbfs = j.value("threshold_dbfs", c.threshold_dbfs);
    c.compression_ratio = j.value("compression_ratio", c.compression_ratio);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed processor config: ") + e.what());
  }
}

namespace {

std::vector<double> ear_average(const SpinSignalSet& scene, Ear ear) {
  std::vector<const std::vector<double>*> mics;
  for (std::size_t i = 0; i < scene.labels.size(); ++i) {
    if (scene.labels[i].ear == ear) mics.push_back(&scene.mixture[i]);
  }
  if (mics.empty()) {
    throw MalformedInputError("scene '" + scene.scene_id + "' is missing microphones for one ear");
  }
  const std::size_t n = mics.front()->size();
  std::vector<double> avg(n, 0.0);
  for (const std::vector<double>* m : mics) {
    if (m->size() != n) throw MalformedInputError("scene channels have unequal lengths");
    for (std::size_t i = 0; i < n; ++i) avg[i] += (*m)[i];
  }
  const double inv = 1.0 / static_cast<double>(mics.size());
  for (double& v : avg) v *= inv;
  return avg;
}

std::vector<double> process_ear(const std::vector<double>& x, const ProcessorConfig& cfg,
                                const std::vector<std::vector<double>>& bank,
                                const std::array<double, 6>& gains_db, double fs) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;

  const std::size_t lookahead =
      static_cast<std::size_t>(std::lround(cfg.lookahead_ms * fs / 1000.0));
  const double alpha_atk = std::exp(-1.0 / (fs * cfg.attack_ms / 1000.0));
  const double alpha_rel = std::exp(-1.0 / (fs * cfg.release_ms / 1000.0));
  const double slope = 1.0 / cfg.compression_ratio - 1.0;

  for (std::size_t b = 0; b < bank.size(); ++b) {
    std::vector<double> band = fft_convolve(x, bank[b]);
    band.resize(n);
    const double static_gain = db_to_amp(gains_db[b]);
    if (slope == 0.0) {
      for (std::size_t i = 0; i < n; ++i) out[i] += band[i] * static_gain;
      continue;
    }
    double power = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t probe = std::min(i + lookahead, n - 1);
      const double p_in = band[probe] * band[probe];
      const double alpha = p_in > power ? alpha_atk : alpha_rel;
      power = alpha * power + (1.0 - alpha) * p_in;
      const double level_db = 10.0 * std::log10(power + 1e-24);
      const double over = std::max(0.0, level_db - cfg.threshold_dbfs);
      out[i] += band[i] * static_gain * db_to_amp(slope * over);
    }
  }
  return out;
}

}  // namespace

EnhancedOutput enhance(const SpinSignalSet& scene, const ProcessorConfig& config,
                       const Audiogram& audiogram) {
  config.validate();
  audiogram.validate();
  const double fs = scene.sample_rate;
  if (fs <= 0.0) throw MalformedInputError("scene has no sample rate");

  const BandMasks masks(config.crossover_hz, 1.0 / 6.0);
  const std::vector<std::vector<double>> bank = design_fir_bank(masks, fs, config.fir_taps);

  EnhancedOutput out;
  out.scene_id = scene.scene_id;
  out.listener_id = audiogram.listener_id;
  out.sample_rate = fs;
  out.latency_samples = static_cast<long>((config.fir_taps - 1) / 2);
  for (Ear ear : {Ear::left, Ear::right}) {
    const std::vector<double> x = ear_average(scene, ear);
    const std::array<double, 6> gains = prescribe_gains(audiogram, ear);
    std::vector<double> y = process_ear(x, config, bank, gains, fs);
    (ear == Ear::left ? out.left : out.right) = std::move(y);
  }
  return out;
}

EnhancedOutput passthrough(const SpinSignalSet& scene, const Audiogram& audiogram) {
  EnhancedOutput out;
  out.scene_id = scene.scene_id;
  out.listener_id = audiogram.listener_id;
  out.sample_rate = scene.sample_rate;
  out.latency_samples = 0;
  out.left = scene.channel({Ear::left, 0});
  out.right = scene.channel({Ear::right, 0});
  return out;
}

}  // namespace spinsim
