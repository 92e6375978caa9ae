#include "spinsim/render.hpp"

#include <algorithm>
#include <cmath>

#include "spinsim/common.hpp"
#include "spinsim/dsp.hpp"
#include "spinsim/head_filter.hpp"
#include "spinsim/rir.hpp"

namespace spinsim {

using namespace dsp;

namespace {

constexpr double kSnrFrameSeconds = 0.010;
constexpr double kActiveFloorDb = -40.0;
constexpr double kHeadroomDb = -3.0;

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace

double set_snr(std::span<const double> target, std::span<const double> interferer,
               double snr_db, double sample_rate) {
  if (target.size() != interferer.size()) {
    throw InvalidArgumentError("set_snr requires equal-length signals");
  }
  if (sample_rate <= 0.0) throw InvalidArgumentError("set_snr sample rate must be positive");
  if (target.empty()) throw SilentTargetError("set_snr target is empty");
  const std::size_t frame = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(kSnrFrameSeconds * sample_rate)));
  const std::vector<double> pt = frame_powers(target, frame);
  const std::vector<double> pi = frame_powers(interferer, frame);
  const std::vector<std::size_t> active = active_frames(pt, kActiveFloorDb);
  if (active.empty()) throw SilentTargetError("set_snr target is silent");
  double sum_t = 0.0, sum_i = 0.0;
  for (std::size_t f : active) {
    sum_t += pt[f];
    sum_i += pi[f];
  }
  const double p_t = sum_t / static_cast<double>(active.size());
  const double p_i = sum_i / static_cast<double>(active.size());
  if (!(p_t > 0.0)) throw SilentTargetError("set_snr target is silent");
  if (!(p_i > 0.0)) {
    throw ValidationError("set_snr interferer is silent over the measurement window");
  }
  return std::sqrt(p_t / (p_i * std::pow(10.0, snr_db / 10.0)));
}

const std::vector<double>& SpinSignalSet::channel(const ChannelLabel& label) const {
  const int idx = channel_index(label);
  if (idx < 0) throw NotFoundError("scene has no channel '" + label.str() + "'");
  return mixture[static_cast<std::size_t>(idx)];
}

int SpinSignalSet::channel_index(const ChannelLabel& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].ear == label.ear && labels[i].mic == label.mic) return static_cast<int>(i);
  }
  return -1;
}

namespace {

// Reverberant signal at every microphone for one point source, with the
// head diffraction excess applied per ear on top of the free-field paths.
std::vector<std::vector<double>> propagate(
    const SceneSpec& spec, const std::vector<std::pair<ChannelLabel, Vec3>>& mics,
    const Vec3& source_pos, std::span<const double> dry, std::size_t out_len) {
  const double fs = spec.sample_rate;
  const double az = wrap_angle(std::atan2(source_pos.y - spec.pose.receiver_position.y,
                                          source_pos.x - spec.pose.receiver_position.x) -
                               spec.pose.receiver_yaw);
  std::vector<std::vector<double>> out(mics.size());
  for (std::size_t m = 0; m < mics.size(); ++m) {
    RoomImpulseResponse rir = compute_rir(spec.room, source_pos, mics[m].second,
                                          spec.max_reflection_order, fs, spec.absorption);
    std::vector<double> sig = fft_convolve(dry, rir.taps);
    sig.resize(out_len, 0.0);
    const EarFilter ef = head_diffraction_filter(az, mics[m].first.ear, fs,
                                                 spec.head.head_radius,
                                                 spec.room.speed_of_sound);
    if (!ef.is_identity()) sig = ef.apply(sig, fs);
    out[m] = std::move(sig);
  }
  return out;
}

std::vector<double> reference_mix(const std::vector<std::vector<double>>& per_mic,
                                  int left_front, int right_front) {
  const std::vector<double>& l = per_mic[static_cast<std::size_t>(left_front)];
  const std::vector<double>& r = per_mic[static_cast<std::size_t>(right_front)];
  std::vector<double> ref;
  ref.reserve(l.size() + r.size());
  ref.insert(ref.end(), l.begin(), l.end());
  ref.insert(ref.end(), r.begin(), r.end());
  return ref;
}

}  // namespace

SpinSignalSet render_scene(SceneSpec& spec, const UtteranceSource& corpus,
                           const InterfererSource& interferers,
                           const RenderOptions& options) {
  spec.validate();
  const double fs = spec.sample_rate;

  const Utterance& utt = corpus.get(spec.target_utterance_id);
  std::vector<double> dry(utt.samples.begin(), utt.samples.end());
  if (utt.sample_rate != fs) dry = resample(dry, utt.sample_rate, fs);

  const std::size_t pre = static_cast<std::size_t>(std::lround(options.pre_roll_s * fs));
  const std::size_t post = static_cast<std::size_t>(std::lround(options.post_roll_s * fs));
  std::vector<double> padded(pre + dry.size() + post, 0.0);
  std::copy(dry.begin(), dry.end(), padded.begin() + static_cast<std::ptrdiff_t>(pre));
  const std::size_t n = padded.size();

  const std::vector<std::pair<ChannelLabel, Vec3>> mics =
      mic_world_positions(spec.pose, spec.head);
  const int per_ear = spec.head.mics_per_ear;
  const int left_front = 0;
  const int right_front = per_ear;

  std::vector<std::vector<double>> mix =
      propagate(spec, mics, spec.pose.source_position, padded, n);
  const std::vector<double> target_ref = reference_mix(mix, left_front, right_front);

  for (InterfererSpec& it : spec.interferers) {
    const std::vector<double> signal = interferers.make(it.type, it.seed, n);
    std::vector<std::vector<double>> at_mics = propagate(spec, mics, it.position, signal, n);
    double gain;
    if (it.fixed_gain) {
      gain = *it.fixed_gain;
    } else {
      const std::vector<double> int_ref = reference_mix(at_mics, left_front, right_front);
      gain = set_snr(target_ref, int_ref, it.snr_db, fs);
    }
    it.applied_gain = gain;
    for (std::size_t m = 0; m < mix.size(); ++m) {
      const std::vector<double>& add = at_mics[m];
      std::vector<double>& dst = mix[m];
      for (std::size_t i = 0; i < n; ++i) dst[i] += gain * add[i];
    }
  }

  double peak = 0.0;
  for (const std::vector<double>& ch : mix) {
    for (double v : ch) peak = std::max(peak, std::abs(v));
  }
  if (!std::isfinite(peak)) {
    throw RenderOverflowError("scene '" + spec.scene_id + "' produced a non-finite mixture");
  }
  double scale = 1.0;
  const double cap = db_to_amp(kHeadroomDb);
  if (options.apply_headroom && peak > cap) scale = cap / peak;
  if (scale != 1.0) {
    for (std::vector<double>& ch : mix) {
      for (double& v : ch) v *= scale;
    }
  }
  spec.normalisation_scale = scale;

  SpinSignalSet out;
  out.scene_id = spec.scene_id;
  out.sample_rate = fs;
  for (const auto& [label, pos] : mics) out.labels.push_back(label);
  out.mixture = std::move(mix);
  out.reference = std::move(padded);
  out.transcript = spec.transcript.empty() ? utt.transcript : spec.transcript;
  out.normalisation_scale = scale;
  return out;
}

}  // namespace spinsim
