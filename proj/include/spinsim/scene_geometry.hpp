#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinsim/room.hpp"
#include "spinsim/vec3.hpp"

namespace spinsim {

enum class Ear { left, right };

inline const char* ear_name(Ear e) { return e == Ear::left ? "L" : "R"; }

// Channel identifier: ear plus microphone index (0 = front mic).
struct ChannelLabel {
  Ear ear = Ear::left;
  int mic = 0;

  std::string str() const { return ear_name(ear) + std::to_string(mic); }
  bool operator==(const ChannelLabel&) const = default;
};

// Source/receiver placement. Yaw is the heading of the head front in world
// coordinates (0 = +x); the sampler always points it at the source.
struct ScenePose {
  Vec3 source_position;
  Vec3 receiver_position;
  double receiver_yaw = 0.0;

  // Azimuth of the source in the head frame, in (-pi, pi]; positive to the
  // listener's left.
  double source_azimuth() const;
};

// Behind-the-ear microphone array on a rigid spherical head. Offsets are in
// the head frame (x front, y left, z up) for the LEFT ear; the right ear
// mirrors them through the median plane.
struct HeadGeometry {
  double head_radius = 0.0875;  // metres
  int mics_per_ear = 3;
  double ear_height = 1.2;  // metres above floor (seated)
  std::vector<Vec3> left_mic_offsets;  // size == mics_per_ear

  static HeadGeometry with_mics(int mics_per_ear);
  void validate() const;

  int channel_count() const { return 2 * mics_per_ear; }
};

// Minimum receiver clearance from walls and from the source.
inline constexpr double kMinClearance = 1.0;  // metres

// Rejection-samples a pose: source uniform over the room floor area, receiver
// uniform over the area at least 1 m from every wall, pair accepted when the
// separation is at least 1 m. Heights are fixed at `ear_height`.
// Deterministic per seed.
ScenePose sample_scene_geometry(const RoomSpec& room, std::uint64_t rng_seed,
                                double ear_height = 1.2);

// World-space microphone positions for a posed head, ordered left mics then
// right mics, front to back.
std::vector<std::pair<ChannelLabel, Vec3>> mic_world_positions(
    const ScenePose& pose, const HeadGeometry& head);

// Validates the ScenePose invariants against a room (clearances, containment).
void validate_pose(const RoomSpec& room, const ScenePose& pose);

}  // namespace spinsim
