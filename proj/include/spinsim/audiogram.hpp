#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "spinsim/scene_geometry.hpp"

namespace spinsim {

inline constexpr std::array<double, 6> kAudiogramFreqs = {250.0,  500.0,  1000.0,
                                                          2000.0, 4000.0, 8000.0};
inline constexpr double kMaxThresholdDb = 120.0;

struct Audiogram {
  std::string listener_id;
  std::array<double, 6> left{};   // hearing threshold in dB HL per frequency
  std::array<double, 6> right{};

  const std::array<double, 6>& ear(Ear e) const { return e == Ear::left ? left : right; }
  std::array<double, 6>& ear(Ear e) { return e == Ear::left ? left : right; }
  double better_ear_average() const;  // mean threshold of the better ear
  void validate() const;
};

enum class LossShape { normal, flat, sloping, steep_sloping };
enum class LossSeverity { mild, moderate, severe };

const char* loss_shape_name(LossShape s);
LossShape parse_loss_shape(const std::string& name);
const char* loss_severity_name(LossSeverity s);
LossSeverity parse_loss_severity(const std::string& name);

struct ListenerProfile {
  LossShape shape = LossShape::flat;
  LossSeverity severity = LossSeverity::moderate;
  double asymmetry_db = 0.0;  // added to the right ear

  void validate() const;
};

// Draw one audiogram from the profile: shape template plus severity offset,
// per-frequency jitter, thresholds clamped to [0, 120] dB HL.
Audiogram generate_listener(const ListenerProfile& profile, std::uint64_t seed,
                            const std::string& listener_id);

// A mixed panel of listeners spanning the shape/severity grid.
std::vector<Audiogram> generate_panel(int count, std::uint64_t seed);

nlohmann::json audiogram_to_json(const Audiogram& a);
Audiogram audiogram_from_json(const nlohmann::json& j);

Ear parse_ear(const std::string& name);

}  // namespace spinsim
