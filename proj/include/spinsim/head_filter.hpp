#pragma once

#include <vector>

#include "spinsim/dsp.hpp"
#include "spinsim/scene_geometry.hpp"

namespace spinsim {

// Woodworth spherical-head interaural time difference (a/c)(theta + sin
// theta). Azimuths behind the head fold onto the front hemisphere, so |ITD|
// peaks at +-pi/2 and vanishes directly ahead and behind. Sign convention:
// positive means the right ear lags (source on the left).
double woodworth_itd(double azimuth, double head_radius = 0.0875,
                     double speed_of_sound = 343.0);

// Per-ear rendering filter for a rigid-sphere head: the contralateral ear is
// delayed and receives a first-order high-shelf cut; the ipsilateral ear
// passes unmodified.
struct EarFilter {
  double delay_seconds = 0.0;
  double shadow_cut_db = 0.0;     // plateau of the shelf cut, <= 0
  double shadow_corner_hz = 0.0;  // 0 when no shadow applies

  bool is_identity() const {
    return delay_seconds == 0.0 && shadow_cut_db == 0.0;
  }

  // Shelf magnitude at a frequency; 1.0 for the ipsilateral ear.
  double shadow_gain_at(double f_hz, double sample_rate) const;

  // Applies delay (rounded to the nearest sample) and shadow, preserving
  // length.
  std::vector<double> apply(const std::vector<double>& x,
                            double sample_rate) const;
};

// Full spherical-head filter: delay carries the entire Woodworth ITD on the
// contralateral ear. Azimuth in [-pi, pi], positive to the listener's left.
EarFilter binaural_head_filter(double azimuth, Ear ear, double sample_rate,
                               double head_radius = 0.0875,
                               double speed_of_sound = 343.0);

// Variant used when the microphone geometry already provides the free-field
// interaural delay: the contralateral ear receives only the diffraction
// excess (a/c)(theta - sin theta) so the composite delay stays at the
// Woodworth value.
EarFilter head_diffraction_filter(double azimuth, Ear ear, double sample_rate,
                                  double head_radius = 0.0875,
                                  double speed_of_sound = 343.0);

}  // namespace spinsim
