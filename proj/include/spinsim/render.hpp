#pragma once

#include <span>
#include <string>
#include <vector>

#include "spinsim/scene_geometry.hpp"
#include "spinsim/scene_spec.hpp"

namespace spinsim {

// Gain to apply to an interferer so that the target-to-interferer power
// ratio over the target-active frames equals snr_db. Both inputs are the
// signals observed at the reference microphones.
double set_snr(std::span<const double> target, std::span<const double> interferer,
               double snr_db, double sample_rate = 44100.0);

// One rendered scene: reverberant multi-microphone mixture plus the dry
// target reference on the same timeline.
struct SpinSignalSet {
  std::string scene_id;
  double sample_rate = 0.0;
  std::vector<ChannelLabel> labels;           // L0..Ln then R0..Rn
  std::vector<std::vector<double>> mixture;   // one vector per label
  std::vector<double> reference;              // anechoic target, padded timeline
  std::string transcript;
  double normalisation_scale = 1.0;

  std::size_t frames() const { return mixture.empty() ? 0 : mixture.front().size(); }
  const std::vector<double>& channel(const ChannelLabel& label) const;
  int channel_index(const ChannelLabel& label) const;  // -1 when absent
};

struct RenderOptions {
  bool apply_headroom = true;   // scale down when the mixture peaks above -3 dBFS
  double pre_roll_s = 1.0;      // interferer-only lead-in
  double post_roll_s = 1.0;     // interferer-only tail
};

SpinSignalSet render_scene(SceneSpec& spec, const UtteranceSource& corpus,
                           const InterfererSource& interferers,
                           const RenderOptions& options = {});

}  // namespace spinsim
