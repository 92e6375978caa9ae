#include "spinsim/intelligibility.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include "spinsim/common.hpp"
#include "spinsim/dsp.hpp"

namespace spinsim {

using namespace dsp;

namespace {

constexpr double kMetricFs = 10000.0;
constexpr std::size_t kFrameLen = 256;
constexpr std::size_t kHop = 128;
constexpr std::size_t kNfft = 512;
constexpr int kBandCount = 15;
constexpr double kBandBaseHz = 150.0;
constexpr int kSegmentFrames = 30;
constexpr double kDynamicRangeDb = 40.0;
constexpr double kClipBoostDb = 15.0;
constexpr double kMaxLagSeconds = 0.05;

// Band energies per STFT frame: rows are frames, columns the
// one-third-octave bands.
std::vector<std::array<double, kBandCount>> band_envelope(
    const std::vector<double>& x, std::vector<double>* frame_energy) {
  const std::vector<double> win = hann(kFrameLen);
  const std::size_t n = x.size();
  std::vector<std::array<double, kBandCount>> env;
  if (n < kFrameLen) return env;
  const std::size_t frames = 1 + (n - kFrameLen) / kHop;
  env.reserve(frames);

  // Bin ranges of the one-third-octave bands.
  std::array<std::pair<std::size_t, std::size_t>, kBandCount> ranges;
  for (int b = 0; b < kBandCount; ++b) {
    const double centre = kBandBaseHz * std::pow(2.0, b / 3.0);
    const double lo = centre * std::pow(2.0, -1.0 / 6.0);
    const double hi = centre * std::pow(2.0, 1.0 / 6.0);
    const double bin_hz = kMetricFs / static_cast<double>(kNfft);
    const std::size_t k0 = static_cast<std::size_t>(std::ceil(lo / bin_hz));
    const std::size_t k1 = std::min<std::size_t>(
        kNfft / 2, static_cast<std::size_t>(std::ceil(hi / bin_hz)));
    ranges[static_cast<std::size_t>(b)] = {k0, std::max(k0, k1)};
  }

  std::vector<double> buf(kFrameLen);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t start = f * kHop;
    double energy = 0.0;
    for (std::size_t i = 0; i < kFrameLen; ++i) {
      buf[i] = x[start + i] * win[i];
      energy += buf[i] * buf[i];
    }
    if (frame_energy) frame_energy->push_back(energy);
    const std::vector<std::complex<double>> spec = rfft(buf, kNfft);
    std::array<double, kBandCount> bands{};
    for (int b = 0; b < kBandCount; ++b) {
      const auto [k0, k1] = ranges[static_cast<std::size_t>(b)];
      double e = 0.0;
      for (std::size_t k = k0; k < k1; ++k) e += std::norm(spec[k]);
      bands[static_cast<std::size_t>(b)] = std::sqrt(e);
    }
    env.push_back(bands);
  }
  return env;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return 2.0;  // sentinel: undefined
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double envelope_metric(std::span<const double> reference, std::span<const double> degraded,
                       double sample_rate) {
  if (sample_rate <= 0.0) throw InvalidArgumentError("sample rate must be positive");
  if (reference.empty()) throw SilentReferenceError("reference signal is empty");
  if (!(rms(reference) > 0.0)) throw SilentReferenceError("reference signal is silent");
  const double nr = static_cast<double>(reference.size());
  const double nd = static_cast<double>(degraded.size());
  if (std::abs(nr - nd) > 0.1 * nr) {
    throw AlignmentFailureError("signal lengths differ by more than 10 percent");
  }

  std::vector<double> ref10 = resample(reference, sample_rate, kMetricFs);
  std::vector<double> deg10 = resample(degraded, sample_rate, kMetricFs);

  const int max_lag = static_cast<int>(std::lround(kMaxLagSeconds * kMetricFs));
  const int lag = align_lag(ref10, deg10, max_lag);
  if (lag > 0) {
    deg10.erase(deg10.begin(), deg10.begin() + lag);
  } else if (lag < 0) {
    deg10.insert(deg10.begin(), static_cast<std::size_t>(-lag), 0.0);
  }
  const std::size_t n = std::min(ref10.size(), deg10.size());
  ref10.resize(n);
  deg10.resize(n);

  std::vector<double> ref_energy;
  const auto ref_env_all = band_envelope(ref10, &ref_energy);
  const auto deg_env_all = band_envelope(deg10, nullptr);
  const std::size_t frames = std::min(ref_env_all.size(), deg_env_all.size());
  if (frames == 0) throw AlignmentFailureError("signals too short for the envelope analysis");

  // Keep frames within the reference dynamic range.
  double max_e = 0.0;
  for (std::size_t f = 0; f < frames; ++f) max_e = std::max(max_e, ref_energy[f]);
  const double floor_e = max_e * std::pow(10.0, -kDynamicRangeDb / 10.0);
  std::vector<std::size_t> keep;
  for (std::size_t f = 0; f < frames; ++f) {
    if (ref_energy[f] > floor_e) keep.push_back(f);
  }
  if (keep.size() < static_cast<std::size_t>(kSegmentFrames)) {
    throw AlignmentFailureError("not enough active frames for the envelope analysis");
  }

  const double clip_gain = 1.0 + std::pow(10.0, kClipBoostDb / 20.0);
  double total = 0.0;
  std::size_t cells = 0;
  std::vector<double> xs(kSegmentFrames), ys(kSegmentFrames);
  for (std::size_t m = kSegmentFrames; m <= keep.size(); ++m) {
    for (int b = 0; b < kBandCount; ++b) {
      double ex = 0.0, ey = 0.0;
      for (int i = 0; i < kSegmentFrames; ++i) {
        const std::size_t f = keep[m - kSegmentFrames + static_cast<std::size_t>(i)];
        xs[static_cast<std::size_t>(i)] = ref_env_all[f][static_cast<std::size_t>(b)];
        ys[static_cast<std::size_t>(i)] = deg_env_all[f][static_cast<std::size_t>(b)];
        ex += xs[static_cast<std::size_t>(i)] * xs[static_cast<std::size_t>(i)];
        ey += ys[static_cast<std::size_t>(i)] * ys[static_cast<std::size_t>(i)];
      }
      if (!(ey > 0.0) || !(ex > 0.0)) continue;
      const double alpha = std::sqrt(ex / ey);
      for (int i = 0; i < kSegmentFrames; ++i) {
        const double xi = xs[static_cast<std::size_t>(i)];
        const double yi = ys[static_cast<std::size_t>(i)] * alpha;
        ys[static_cast<std::size_t>(i)] = std::min(yi, clip_gain * xi);
      }
      const double r = pearson(xs, ys);
      if (r > 1.5) continue;  // zero-variance cell
      total += r;
      ++cells;
    }
  }
  if (cells == 0) return 0.0;
  return total / static_cast<double>(cells);
}

void LogisticMap::validate() const {
  if (!(slope > 0.0)) throw InvalidArgumentError("logistic slope must be positive");
  if (!std::isfinite(midpoint)) throw InvalidArgumentError("logistic midpoint must be finite");
}

nlohmann::json logistic_to_json(const LogisticMap& m) {
  return nlohmann::json{{"slope", m.slope}, {"midpoint", m.midpoint}};
}

LogisticMap logistic_from_json(const nlohmann::json& j) {
  try {
    LogisticMap m;
    m.slope = j.value("slope", m.slope);
    m.midpoint = j.value("midpoint", m.midpoint);
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed logistic map: ") + e.what());
  }
}

double map_to_intelligibility(double metric, const LogisticMap& map) {
  map.validate();
  return 1.0 / (1.0 + std::exp(-map.slope * (metric - map.midpoint)));
}

namespace {

double fit_mse(const std::vector<std::pair<double, double>>& pairs, double a, double b) {
  double sum = 0.0;
  for (const auto& [d, s] : pairs) {
    const double pred = 1.0 / (1.0 + std::exp(-a * (d - b)));
    const double e = pred - s;
    sum += e * e;
  }
  return sum / static_cast<double>(pairs.size());
}

}  // namespace

LogisticMap fit_logistic(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 10) {
    throw FitFailureError("logistic fit needs at least 10 (metric, score) pairs");
  }
  double dmin = pairs.front().first, dmax = dmin;
  double smin = pairs.front().second, smax = smin;
  for (const auto& [d, s] : pairs) {
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  if (dmax - dmin < 0.2) {
    throw FitFailureError("logistic fit needs a metric range of at least 0.2");
  }
  if (smax - smin < 1e-9) {
    throw FitFailureError("logistic fit needs varying scores");
  }

  // Grid over slope and the predicted level at the metric mean; the level
  // axis keeps near-constant maps of any height in the search space, so the
  // fit can never lose badly to a constant predictor.
  double dmean = 0.0;
  for (const auto& [d, s] : pairs) dmean += d;
  dmean /= static_cast<double>(pairs.size());

  double best_a = 1.0, best_b = 0.5, best = std::numeric_limits<double>::infinity();
  for (int ia = 0; ia < 48; ++ia) {
    const double a = 0.25 * std::pow(60.0 / 0.25, ia / 47.0);
    for (int ip = 0; ip < 49; ++ip) {
      const double level = 0.02 + 0.96 * ip / 48.0;
      const double b = dmean + std::log(1.0 / level - 1.0) / a;
      const double e = fit_mse(pairs, a, b);
      if (e < best) {
        best = e;
        best_a = a;
        best_b = b;
      }
    }
  }
  double step_a = best_a * 0.5;
  double step_b = 0.1 + 0.1 * std::abs(best_b - dmean);
  for (int round = 0; round < 60; ++round) {
    bool improved = false;
    for (const double da : {-step_a, step_a}) {
      const double a = best_a + da;
      if (a <= 0.0) continue;
      const double e = fit_mse(pairs, a, best_b);
      if (e < best) {
        best = e;
        best_a = a;
        improved = true;
      }
    }
    for (const double db : {-step_b, step_b}) {
      const double e = fit_mse(pairs, best_a, best_b + db);
      if (e < best) {
        best = e;
        best_b += db;
        improved = true;
      }
    }
    if (!improved) {
      step_a *= 0.5;
      step_b *= 0.5;
    }
  }
  LogisticMap m;
  m.slope = best_a;
  m.midpoint = best_b;
  m.validate();
  return m;
}

IntelligibilityScore predict_intelligibility(const SpinSignalSet& scene,
                                             const EnhancedOutput& enhanced,
                                             const Audiogram& audiogram,
                                             const LogisticMap& map,
                                             const HearingLossConfig& loss_config) {
  map.validate();
  audiogram.validate();
  if (scene.reference.empty()) throw SilentReferenceError("scene has no reference signal");
  const double fs = scene.sample_rate;

  double best_metric = -1.0;
  for (Ear ear : {Ear::left, Ear::right}) {
    const std::vector<double>& y = enhanced.ear(ear);
    if (y.empty()) continue;
    const std::vector<double> heard =
        simulate_hearing_loss(y, audiogram, ear, fs, loss_config);
    double d = 0.0;
    if (rms(heard) > 0.0) {
      d = envelope_metric(scene.reference, heard, fs);
    }
    best_metric = std::max(best_metric, d);
  }
  if (best_metric < -1.0 + 1e-12 && enhanced.left.empty() && enhanced.right.empty()) {
    throw MalformedInputError("enhanced output has no audio");
  }

  IntelligibilityScore out;
  out.scene_id = scene.scene_id;
  out.listener_id = audiogram.listener_id;
  out.metric = best_metric;
  out.score = map_to_intelligibility(best_metric, map);
  return out;
}

}  // namespace spinsim
