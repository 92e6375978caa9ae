#pragma once

#include <vector>

#include "spinsim/room.hpp"
#include "spinsim/scene_geometry.hpp"
#include "spinsim/vec3.hpp"

namespace spinsim {

struct RoomImpulseResponse {
  double sample_rate = 0.0;
  std::vector<double> taps;
  ChannelLabel channel;

  double energy() const;
};

// Image-source model of a cuboid room with uniform, frequency-independent
// absorption. Each image of total reflection count n contributes amplitude
// (1 - alpha)^(n/2) / d at delay round(d / c * fs); gain reference is 1 at
// 1 m. Images with zero amplitude are dropped, so a fully absorbing room
// produces exactly the direct-path tap.
//
// `absorption` < 0 means "derive from the room via absorption_from_rt60".
RoomImpulseResponse compute_rir(const RoomSpec& room, const Vec3& source,
                                const Vec3& mic, int max_order,
                                double sample_rate, double absorption = -1.0);

}  // namespace spinsim
