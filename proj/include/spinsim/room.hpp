#pragma once

#include "spinsim/vec3.hpp"

namespace spinsim {

// Cuboid room with a uniform, frequency-independent wall absorption derived
// from the reverberation target.
struct RoomSpec {
  double length_x = 6.0;   // metres
  double length_y = 5.0;   // metres
  double length_z = 2.5;   // metres
  double rt60_target = 0.3;  // seconds
  double speed_of_sound = 343.0;  // m/s

  double volume() const { return length_x * length_y * length_z; }
  double surface_area() const {
    return 2.0 * (length_x * length_y + length_x * length_z +
                  length_y * length_z);
  }
  bool contains(const Vec3& p) const {
    return p.x > 0.0 && p.x < length_x && p.y > 0.0 && p.y < length_y &&
           p.z > 0.0 && p.z < length_z;
  }

  // Throws ValidationError if any dimension or the reverberation target is
  // non-positive.
  void validate() const;
};

// Sabine: alpha = 0.161 V / (S RT60). Throws InfeasibleReverberationError
// when the target would need alpha > 1.
double absorption_from_rt60(const RoomSpec& room);

// Algebraic inverse of absorption_from_rt60.
double rt60_from_absorption(const RoomSpec& room, double alpha);

// Eyring: alpha = 1 - exp(-0.161 V / (S RT60)). An image-source lattice with
// uniform per-reflection absorption realises the Eyring decay law, so RIRs
// rendered with this value measure at the requested RT60; the Sabine value
// overshoots the decay for short targets.
double eyring_absorption_from_rt60(const RoomSpec& room);

}  // namespace spinsim
