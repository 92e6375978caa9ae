#include "spinsim/hearing_loss.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>

#include "spinsim/band_filter.hpp"
#include "spinsim/common.hpp"
#include "spinsim/dsp.hpp"
#include "spinsim/rng.hpp"

namespace spinsim {

using namespace dsp;

namespace {

const BandMasks& audiogram_masks() {
  static const BandMasks masks(
      geometric_edges(std::vector<double>(kAudiogramFreqs.begin(), kAudiogramFreqs.end())));
  return masks;
}

// Unit-RMS noise confined to one audiogram band, regenerated only when a
// longer signal or a new sample rate shows up. Fixed seeds keep the
// simulation deterministic.
const std::vector<double>& band_noise(std::size_t band, double sample_rate,
                                      std::size_t min_len) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, long>, std::vector<double>> cache;
  std::scoped_lock lock(mu);
  const std::pair<std::size_t, long> key{band, std::lround(sample_rate)};
  std::vector<double>& entry = cache[key];
  if (entry.size() < min_len) {
    const std::size_t len = std::max<std::size_t>(min_len, 1u << 16);
    Rng rng(derive_seed(0x68656172u, "hl-internal-noise:" + std::to_string(band)));
    std::vector<double> white(len);
    for (double& w : white) w = rng.normal();
    std::vector<double> shaped = split_audiogram_bands(white, sample_rate)[band];
    const double scale = 1.0 / std::max(dsp::rms(shaped), 1e-30);
    for (double& s : shaped) s *= scale;
    entry = std::move(shaped);
  }
  return entry;
}

}  // namespace

std::array<std::vector<double>, 6> split_audiogram_bands(std::span<const double> signal,
                                                         double sample_rate) {
  if (sample_rate <= 0.0) throw InvalidArgumentError("sample rate must be positive");
  std::array<std::vector<double>, 6> bands;
  const std::size_t n = signal.size();
  if (n == 0) return bands;
  // Padding keeps the circular wrap of the band transitions out of the signal.
  const std::size_t nfft = next_pow2(n + 4096);
  const std::vector<std::complex<double>> spec = rfft(signal, nfft);
  const BandMasks& masks = audiogram_masks();
  for (std::size_t b = 0; b < bands.size(); ++b) {
    std::vector<std::complex<double>> part(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double hz = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
      part[k] = spec[k] * masks.weight(b, hz);
    }
    std::vector<double> band = irfft(part, nfft);
    band.resize(n);
    bands[b] = std::move(band);
  }
  return bands;
}

std::vector<double> simulate_hearing_loss(std::span<const double> signal,
                                          const Audiogram& audiogram, Ear ear,
                                          double sample_rate,
                                          const HearingLossConfig& config) {
  audiogram.validate();
  if (sample_rate <= 0.0) throw InvalidArgumentError("sample rate must be positive");
  const std::size_t n = signal.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;

  const std::array<double, 6>& thresholds = audiogram.ear(ear);
  std::array<std::vector<double>, 6> bands = split_audiogram_bands(signal, sample_rate);
  for (std::size_t b = 0; b < bands.size(); ++b) {
    std::vector<double>& band = bands[b];
    const double loss = thresholds[b];
    const double atten_db = std::max(0.0, loss - config.no_effect_floor_db);
    const double atten = db_to_amp(-atten_db);
    const double expo = loss / kMaxThresholdDb;
    if (config.recruitment && expo > 0.0) {
      // Loudness recruitment: power-law envelope expansion pivoted where
      // loudness growth rejoins normal, so soft passages are pushed down
      // harder as the loss grows. Never amplifies.
      const double full = db_to_amp(config.recruitment_full_db - config.spl_offset_db);
      const std::vector<double> env = smooth_envelope(band, sample_rate, config.envelope_tau_s);
      for (std::size_t i = 0; i < n; ++i) {
        const double e = env[i];
        double factor = 0.0;
        if (e > 0.0) factor = e >= full ? 1.0 : std::pow(e / full, expo);
        out[i] += band[i] * atten * factor;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) out[i] += band[i] * atten;
    }
    if (config.audibility_noise && loss > config.no_effect_floor_db) {
      // Internal noise anchored to the elevated threshold: band content
      // below the threshold drowns, content well above is untouched. Added
      // after the attenuation so the noise floor never grows with the loss.
      const double noise_spl =
          std::min(loss + config.audibility_noise_lift_db, config.recruitment_full_db) -
          atten_db;
      const double sigma = db_to_amp(noise_spl - config.spl_offset_db);
      const std::vector<double>& noise = band_noise(b, sample_rate, n);
      for (std::size_t i = 0; i < n; ++i) out[i] += sigma * noise[i];
    }
  }
  return out;
}

}  // namespace spinsim
