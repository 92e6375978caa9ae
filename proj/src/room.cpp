#include "spinsim/room.hpp"

#include <cmath>
#include <string>

#include "spinsim/common.hpp"

namespace spinsim {

namespace {
constexpr double kSabineConstant = 0.161;  // s/m at room temperature
}

void RoomSpec::validate() const {
  if (length_x <= 0.0 || length_y <= 0.0 || length_z <= 0.0)
    throw ValidationError("room: dimensions must be positive");
  if (rt60_target <= 0.0)
    throw ValidationError("room: rt60_target must be positive");
  if (speed_of_sound <= 0.0)
    throw ValidationError("room: speed_of_sound must be positive");
}

double absorption_from_rt60(const RoomSpec& room) {
  room.validate();
  const double alpha =
      kSabineConstant * room.volume() / (room.surface_area() * room.rt60_target);
  if (alpha > 1.0)
    throw InfeasibleReverberationError(
        "room cannot support rt60 " + std::to_string(room.rt60_target) +
        " s: required absorption " + std::to_string(alpha) + " exceeds 1");
  return alpha;
}

double rt60_from_absorption(const RoomSpec& room, double alpha) {
  if (alpha <= 0.0 || alpha > 1.0)
    throw ValidationError("absorption must lie in (0, 1]");
  return kSabineConstant * room.volume() / (room.surface_area() * alpha);
}

double eyring_absorption_from_rt60(const RoomSpec& room) {
  room.validate();
  const double exponent =
      kSabineConstant * room.volume() / (room.surface_area() * room.rt60_target);
  return 1.0 - std::exp(-exponent);
}

}  // namespace spinsim
