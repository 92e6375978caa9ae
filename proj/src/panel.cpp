#include "spinsim/panel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <sstream>

#include "spinsim/common.hpp"
#include "spinsim/dsp.hpp"
#include "spinsim/hearing_loss.hpp"

namespace spinsim {

using namespace dsp;

namespace {

// Full-scale calibration: an RMS of -26 dBFS presents at 65 dB SPL.
constexpr double kSplOffsetDb = 91.0;
constexpr double kSnrFloorDb = -15.0;
constexpr double kSnrCeilDb = 30.0;
constexpr double kSnrSpanDb = 30.0;
constexpr double kAudibilitySpanDb = 30.0;
constexpr double kMaxAlignSeconds = 0.05;
constexpr double kEnvelopeTauS = 0.016;

// Importance weights per audiogram band; they sum to one.
constexpr std::array<double, 6> kBandWeights = {0.10, 0.14, 0.22, 0.26, 0.18, 0.10};

// Modulation-domain SNR: the part of the output's band envelope explained by
// the reference envelope versus everything else (interferer modulations,
// distortion). Waveform phase never enters, so plain reverberation keeps its
// intelligibility while added maskers lose it.
double modulation_snr_db(const std::vector<double>& env_ref, const std::vector<double>& env_y) {
  const std::size_t n = std::min(env_ref.size(), env_y.size());
  double mr = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mr += env_ref[i];
    my += env_y[i];
  }
  mr /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double srr = 0.0, syy = 0.0, sry = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = env_ref[i] - mr;
    const double y = env_y[i] - my;
    srr += r * r;
    syy += y * y;
    sry += r * y;
  }
  if (!(srr > 0.0) || !(syy > 0.0) || sry <= 0.0) return kSnrFloorDb - 1.0;
  const double alpha = sry / srr;
  const double signal = alpha * alpha * srr;
  const double noise = std::max(syy - signal, 0.0);
  if (!(noise > 0.0)) return kSnrCeilDb;
  return std::clamp(pow_to_db(signal / noise), kSnrFloorDb - 1.0, kSnrCeilDb);
}

double ear_index(const std::vector<double>& reference, const std::vector<double>& y,
                 const std::array<double, 6>& thresholds, double fs) {
  if (y.empty() || !(rms(y) > 0.0)) return 0.0;

  const int max_lag = static_cast<int>(std::lround(kMaxAlignSeconds * fs));
  const int lag = align_lag(reference, y, max_lag);
  std::vector<double> aligned(y);
  if (lag > 0) {
    aligned.erase(aligned.begin(), aligned.begin() + lag);
  } else if (lag < 0) {
    aligned.insert(aligned.begin(), static_cast<std::size_t>(-lag), 0.0);
  }
  const std::size_t n = std::min(reference.size(), aligned.size());
  if (n == 0) return 0.0;
  aligned.resize(n);

  const std::array<std::vector<double>, 6> ref_bands =
      split_audiogram_bands(std::span<const double>(reference.data(), n), fs);
  const std::array<std::vector<double>, 6> y_bands = split_audiogram_bands(aligned, fs);

  double p_ear = 0.0;
  for (std::size_t b = 0; b < kBandWeights.size(); ++b) {
    double band_ms = 0.0;
    for (double v : y_bands[b]) band_ms += v * v;
    band_ms /= static_cast<double>(n);
    if (!(band_ms > 0.0)) continue;
    const double spl = pow_to_db(band_ms) + kSplOffsetDb;
    const double audible = std::clamp((spl - thresholds[b]) / kAudibilitySpanDb, 0.0, 1.0);
    if (audible <= 0.0) continue;

    const std::vector<double> env_ref = smooth_envelope(ref_bands[b], fs, kEnvelopeTauS);
    const std::vector<double> env_y = smooth_envelope(y_bands[b], fs, kEnvelopeTauS);
    const double snr_db = modulation_snr_db(env_ref, env_y);
    const double snr_term = std::clamp((snr_db - kSnrFloorDb) / kSnrSpanDb, 0.0, 1.0);

    p_ear += kBandWeights[b] * snr_term * audible;
  }
  return std::clamp(p_ear, 0.0, 1.0);
}

}  // namespace

double audibility_index(const SpinSignalSet& scene, const EnhancedOutput& enhanced,
                        const Audiogram& audiogram) {
  audiogram.validate();
  if (scene.reference.empty() || !(rms(scene.reference) > 0.0)) {
    throw SilentReferenceError("scene '" + scene.scene_id + "' has a silent reference");
  }
  const double fs = scene.sample_rate;
  const double left = ear_index(scene.reference, enhanced.left, audiogram.left, fs);
  const double right = ear_index(scene.reference, enhanced.right, audiogram.right, fs);
  return std::max(left, right);
}

void PanelConfig::validate() const {
  if (!(word_noise_kappa > 0.0)) {
    throw InvalidArgumentError("panel response concentration must be positive");
  }
}

PanelResponse simulate_response(const SpinSignalSet& scene, const EnhancedOutput& enhanced,
                                const Audiogram& audiogram, Rng& rng, double kappa) {
  if (scene.transcript.empty()) {
    throw InvalidTranscriptError("scene '" + scene.scene_id + "' has no transcript");
  }
  int words = 0;
  {
    std::istringstream ss(scene.transcript);
    std::string w;
    while (ss >> w) ++words;
  }
  if (words == 0) {
    throw InvalidTranscriptError("scene '" + scene.scene_id + "' transcript has no words");
  }

  const double p = audibility_index(scene, enhanced, audiogram);
  double q;
  if (p <= 0.0) {
    q = 0.0;
  } else if (p >= 1.0) {
    q = 1.0;
  } else {
    q = rng.beta(kappa * p, kappa * (1.0 - p));
  }

  PanelResponse r;
  r.scene_id = scene.scene_id;
  r.listener_id = audiogram.listener_id;
  r.words_total = words;
  for (int w = 0; w < words; ++w) {
    if (q >= 1.0 || rng.uniform() < q) ++r.words_correct;
  }
  return r;
}

csv::Table panel_measure(const std::vector<SpinSignalSet>& scenes,
                         const std::vector<Audiogram>& listeners,
                         const EnhancedProvider& provider, const PanelConfig& config) {
  config.validate();
  if (scenes.empty() || listeners.empty()) {
    throw IncompletePanelError("panel needs at least one scene and one listener");
  }
  csv::Table table;
  table.header = {"scene_id", "listener_id", "si_measured"};
  for (const SpinSignalSet& scene : scenes) {
    for (const Audiogram& listener : listeners) {
      EnhancedOutput enhanced;
      try {
        enhanced = provider(scene.scene_id, listener.listener_id);
      } catch (const NotFoundError& e) {
        throw IncompletePanelError("missing enhanced audio for scene '" + scene.scene_id +
                                   "', listener '" + listener.listener_id + "'");
      }
      Rng rng(derive_seed(config.response_seed,
                          "response:" + scene.scene_id + ":" + listener.listener_id));
      // One Beta draw per trial models session-level variability; the same
      // trial re-run with the same seed reproduces bit-identically.
      const PanelResponse r =
          simulate_response(scene, enhanced, listener, rng, config.word_noise_kappa);
      table.rows.push_back({r.scene_id, r.listener_id, csv::format_double(r.proportion())});
    }
  }
  return table;
}

}  // namespace spinsim
