#include "spinsim/head_filter.hpp"

#include <algorithm>
#include <cmath>

#include "spinsim/common.hpp"

namespace spinsim {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Lateral angle in [0, pi/2]: rear azimuths mirror onto the front.
double lateral_angle(double azimuth) {
  double a = std::abs(azimuth);
  if (a > kPi / 2.0) a = kPi - a;
  return a;
}

// Head-shadow depth scales with laterality; 10 dB plateau at full lateral.
constexpr double kMaxShadowDb = 10.0;
constexpr double kShadowCornerHz = 1200.0;

struct ShadowParams {
  double cut_db;
  double corner_hz;
};

ShadowParams shadow_for(double azimuth, Ear ear) {
  const double lat = lateral_angle(azimuth);
  const bool contralateral =
      (azimuth > 0.0 && ear == Ear::right) || (azimuth < 0.0 && ear == Ear::left);
  if (!contralateral || lat == 0.0) return {0.0, 0.0};
  return {-kMaxShadowDb * std::sin(lat), kShadowCornerHz};
}

}  // namespace

double woodworth_itd(double azimuth, double head_radius,
                     double speed_of_sound) {
  const double lat = lateral_angle(azimuth);
  const double magnitude =
      head_radius / speed_of_sound * (lat + std::sin(lat));
  return azimuth >= 0.0 ? magnitude : -magnitude;
}

double EarFilter::shadow_gain_at(double f_hz, double sample_rate) const {
  if (shadow_cut_db == 0.0) return 1.0;
  return dsp::HighShelf(shadow_corner_hz, shadow_cut_db, sample_rate)
      .gain_at(f_hz);
}

std::vector<double> EarFilter::apply(const std::vector<double>& x,
                                     double sample_rate) const {
  std::vector<double> y = x;
  const long shift = std::lround(delay_seconds * sample_rate);
  if (shift > 0) {
    const auto n = static_cast<long>(y.size());
    for (long i = n - 1; i >= 0; --i)
      y[static_cast<std::size_t>(i)] =
          i >= shift ? x[static_cast<std::size_t>(i - shift)] : 0.0;
  }
  if (shadow_cut_db != 0.0)
    dsp::HighShelf(shadow_corner_hz, shadow_cut_db, sample_rate)
        .process_inplace(y);
  return y;
}

EarFilter binaural_head_filter(double azimuth, Ear ear, double sample_rate,
                               double head_radius, double speed_of_sound) {
  if (azimuth < -kPi - 1e-12 || azimuth > kPi + 1e-12)
    throw InvalidArgumentError("head filter: azimuth outside [-pi, pi]");
  if (sample_rate <= 0.0)
    throw InvalidArgumentError("head filter: bad sample rate");

  EarFilter f;
  const double itd = woodworth_itd(azimuth, head_radius, speed_of_sound);
  const bool contralateral =
      (itd > 0.0 && ear == Ear::right) || (itd < 0.0 && ear == Ear::left);
  if (contralateral) f.delay_seconds = std::abs(itd);
  const auto shadow = shadow_for(azimuth, ear);
  f.shadow_cut_db = shadow.cut_db;
  f.shadow_corner_hz = shadow.corner_hz;
  return f;
}

EarFilter head_diffraction_filter(double azimuth, Ear ear, double sample_rate,
                                  double head_radius, double speed_of_sound) {
  EarFilter f = binaural_head_filter(azimuth, ear, sample_rate, head_radius,
                                     speed_of_sound);
  if (f.delay_seconds > 0.0) {
    const double lat = lateral_angle(azimuth);
    f.delay_seconds =
        head_radius / speed_of_sound * std::max(0.0, lat - std::sin(lat));
  }
  return f;
}

}  // namespace spinsim
