#include "spinsim/audiogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>

#include "spinsim/common.hpp"
#include "spinsim/rng.hpp"

namespace spinsim {

double Audiogram::better_ear_average() const {
  double l = 0.0, r = 0.0;
  for (std::size_t i = 0; i < kAudiogramFreqs.size(); ++i) {
    l += left[i];
    r += right[i];
  }
  return std::min(l, r) / static_cast<double>(kAudiogramFreqs.size());
}

void Audiogram::validate() const {
  if (listener_id.empty()) throw SchemaError("listener id is empty");
  for (std::size_t i = 0; i < kAudiogramFreqs.size(); ++i) {
    for (double v : {left[i], right[i]}) {
      if (!(v >= 0.0) || v > kMaxThresholdDb) {
        throw SchemaError("listener '" + listener_id + "' threshold out of [0, 120] dB");
      }
    }
  }
}

const char* loss_shape_name(LossShape s) {
  switch (s) {
    case LossShape::normal: return "normal";
    case LossShape::flat: return "flat";
    case LossShape::sloping: return "sloping";
    case LossShape::steep_sloping: return "steep_sloping";
  }
  throw InvalidArgumentError("bad loss shape");
}

LossShape parse_loss_shape(const std::string& name) {
  if (name == "normal") return LossShape::normal;
  if (name == "flat") return LossShape::flat;
  if (name == "sloping") return LossShape::sloping;
  if (name == "steep_sloping") return LossShape::steep_sloping;
  throw InvalidArgumentError("unknown loss shape '" + name + "'");
}

const char* loss_severity_name(LossSeverity s) {
  switch (s) {
    case LossSeverity::mild: return "mild";
    case LossSeverity::moderate: return "moderate";
    case LossSeverity::severe: return "severe";
  }
  throw InvalidArgumentError("bad loss severity");
}

LossSeverity parse_loss_severity(const std::string& name) {
  if (name == "mild") return LossSeverity::mild;
  if (name == "moderate") return LossSeverity::moderate;
  if (name == "severe") return LossSeverity::severe;
  throw InvalidArgumentError("unknown loss severity '" + name + "'");
}

void ListenerProfile::validate() const {
  if (!(asymmetry_db >= 0.0) || asymmetry_db > 30.0) {
    throw InvalidArgumentError("listener asymmetry must be in [0, 30] dB");
  }
}

namespace {

std::array<double, 6> shape_template(LossShape shape, LossSeverity severity) {
  double base = 0.0;
  switch (severity) {
    case LossSeverity::mild: base = 25.0; break;
    case LossSeverity::moderate: base = 40.0; break;
    case LossSeverity::severe: base = 60.0; break;
  }
  switch (shape) {
    case LossShape::normal:
      return {5.0, 5.0, 5.0, 5.0, 10.0, 10.0};
    case LossShape::flat:
      return {base, base, base, base, base, base};
    case LossShape::sloping:
      // 10 dB per octave above 1 kHz
      return {base, base, base, base + 10.0, base + 20.0, base + 30.0};
    case LossShape::steep_sloping:
      return {base, base, base, base + 20.0, base + 40.0, base + 60.0};
  }
  throw InvalidArgumentError("bad loss shape");
}

}  // namespace

Audiogram generate_listener(const ListenerProfile& profile, std::uint64_t seed,
                            const std::string& listener_id) {
  profile.validate();
  const std::array<double, 6> tmpl = shape_template(profile.shape, profile.severity);
  Rng rng(seed);
  Audiogram a;
  a.listener_id = listener_id;
  for (int e = 0; e < 2; ++e) {
    std::array<double, 6>& ear = e == 0 ? a.left : a.right;
    const double asym = e == 0 ? 0.0 : profile.asymmetry_db;
    for (std::size_t i = 0; i < kAudiogramFreqs.size(); ++i) {
      const double jitter = rng.uniform(-5.0, 5.0);
      ear[i] = std::clamp(tmpl[i] + asym + jitter, 0.0, kMaxThresholdDb);
    }
  }
  a.validate();
  return a;
}

std::vector<Audiogram> generate_panel(int count, std::uint64_t seed) {
  if (count <= 0) throw InvalidArgumentError("panel size must be positive");
  // Stratified cycle from healthy hearing to severe loss so that panels of
  // any size span the severity range; jitter individualises repeats.
  const ListenerProfile grid[] = {
      {LossShape::normal, LossSeverity::mild, 0.0},
      {LossShape::flat, LossSeverity::mild, 0.0},
      {LossShape::sloping, LossSeverity::mild, 0.0},
      {LossShape::flat, LossSeverity::moderate, 0.0},
      {LossShape::sloping, LossSeverity::moderate, 0.0},
      {LossShape::steep_sloping, LossSeverity::moderate, 0.0},
      {LossShape::flat, LossSeverity::severe, 0.0},
      {LossShape::sloping, LossSeverity::severe, 0.0},
      {LossShape::steep_sloping, LossSeverity::severe, 0.0},
      {LossShape::normal, LossSeverity::mild, 0.0},
  };
  constexpr int kGridSize = static_cast<int>(std::size(grid));
  std::vector<Audiogram> panel;
  panel.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng pick(derive_seed(seed, "profile" + std::to_string(i)));
    ListenerProfile p = grid[i % kGridSize];
    p.asymmetry_db = pick.uniform() < 0.2 ? pick.uniform(5.0, 20.0) : 0.0;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "P%03d", i);
    panel.push_back(generate_listener(p, derive_seed(seed, std::string("audiogram") + buf), buf));
  }
  return panel;
}

nlohmann::json audiogram_to_json(const Audiogram& a) {
  nlohmann::json j;
  j["listener_id"] = a.listener_id;
  for (const char* side : {"left", "right"}) {
    nlohmann::json ear;
    const std::array<double, 6>& t = side == std::string("left") ? a.left : a.right;
    for (std::size_t i = 0; i < kAudiogramFreqs.size(); ++i) {
      ear[std::to_string(static_cast<int>(kAudiogramFreqs[i]))] = t[i];
    }
    j[side] = std::move(ear);
  }
  return j;
}

Audiogram audiogram_from_json(const nlohmann::json& j) {
  try {
    Audiogram a;
    a.listener_id = j.at("listener_id").get<std::string>();
    for (const char* side : {"left", "right"}) {
      const nlohmann::json& ear = j.at(side);
      std::array<double, 6>& t = side == std::string("left") ? a.left : a.right;
      for (std::size_t i = 0; i < kAudiogramFreqs.size(); ++i) {
        t[i] = ear.at(std::to_string(static_cast<int>(kAudiogramFreqs[i]))).get<double>();
      }
    }
    a.validate();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed audiogram: ") + e.what());
  }
}

Ear parse_ear(const std::string& name) {
  if (name == "left") return Ear::left;
  if (name == "right") return Ear::right;
  throw InvalidArgumentError("unknown ear label '" + name + "'");
}

}  // namespace spinsim
