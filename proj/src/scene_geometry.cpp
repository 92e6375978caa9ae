#include "spinsim/scene_geometry.hpp"

#include <cmath>
#include <utility>

#include "spinsim/common.hpp"
#include "spinsim/rng.hpp"

namespace spinsim {

namespace {
constexpr int kRejectionBudget = 10000;
}

double ScenePose::source_azimuth() const {
  const Vec3 d = source_position - receiver_position;
  double az = std::atan2(d.y, d.x) - receiver_yaw;
  while (az > 3.141592653589793) az -= 2.0 * 3.141592653589793;
  while (az <= -3.141592653589793) az += 2.0 * 3.141592653589793;
  return az;
}

HeadGeometry HeadGeometry::with_mics(int mics_per_ear) {
  HeadGeometry head;
  head.mics_per_ear = mics_per_ear;
  head.left_mic_offsets.clear();
  const double a = head.head_radius;
  // BTE-style array: mics sit at the ear, spaced 15 mm front-to-back.
  if (mics_per_ear == 2) {
    head.left_mic_offsets = {{0.015, a, 0.0}, {-0.015, a, 0.0}};
  } else if (mics_per_ear == 3) {
    head.left_mic_offsets = {{0.015, a, 0.0}, {0.0, a, 0.0}, {-0.015, a, 0.0}};
  }
  return head;
}

void HeadGeometry::validate() const {
  if (mics_per_ear != 2 && mics_per_ear != 3)
    throw ValidationError("head: mics_per_ear must be 2 or 3");
  if (static_cast<int>(left_mic_offsets.size()) != mics_per_ear)
    throw ValidationError("head: mic offset count must equal mics_per_ear");
  if (head_radius <= 0.0) throw ValidationError("head: radius must be positive");
}

ScenePose sample_scene_geometry(const RoomSpec& room, std::uint64_t rng_seed,
                                double ear_height) {
  room.validate();
  // The receiver needs 1 m of clearance on every side.
  const double rx_lo = kMinClearance, rx_hi = room.length_x - kMinClearance;
  const double ry_lo = kMinClearance, ry_hi = room.length_y - kMinClearance;
  if (rx_hi <= rx_lo || ry_hi <= ry_lo)
    throw InfeasibleGeometryError(
        "room floor area leaves no receiver region after 1 m wall margins");
  if (ear_height < kMinClearance ||
      room.length_z - ear_height < kMinClearance ||
      ear_height <= 0.0 || ear_height >= room.length_z)
    throw InfeasibleGeometryError(
        "ear height violates 1 m clearance from floor or ceiling");

  Rng rng(rng_seed);
  for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
    // Source anywhere over the floor area keeps the accepted receiver
    // distribution exactly uniform: the 1 m exclusion disc around a legal
    // receiver always lies wholly inside the room.
    const Vec3 source{rng.uniform(0.0, room.length_x),
                      rng.uniform(0.0, room.length_y), ear_height};
    const Vec3 receiver{rng.uniform(rx_lo, rx_hi), rng.uniform(ry_lo, ry_hi),
                        ear_height};
    if (distance(source, receiver) < kMinClearance) continue;
    if (!room.contains(source) || !room.contains(receiver)) continue;

    ScenePose pose;
    pose.source_position = source;
    pose.receiver_position = receiver;
    const Vec3 d = source - receiver;
    pose.receiver_yaw = std::atan2(d.y, d.x);
    return pose;
  }
  throw SamplingFailureError("pose rejection budget exhausted (10000 draws)");
}

std::vector<std::pair<ChannelLabel, Vec3>> mic_world_positions(
    const ScenePose& pose, const HeadGeometry& head) {
  head.validate();
  std::vector<std::pair<ChannelLabel, Vec3>> out;
  out.reserve(static_cast<std::size_t>(head.channel_count()));
  for (Ear ear : {Ear::left, Ear::right}) {
    for (int m = 0; m < head.mics_per_ear; ++m) {
      Vec3 off = head.left_mic_offsets[static_cast<std::size_t>(m)];
      if (ear == Ear::right) off.y = -off.y;  // mirror through median plane
      const Vec3 world = pose.receiver_position + rotate_z(off, pose.receiver_yaw);
      out.emplace_back(ChannelLabel{ear, m}, world);
    }
  }
  return out;
}

void validate_pose(const RoomSpec& room, const ScenePose& pose) {
  const auto& r = pose.receiver_position;
  if (!room.contains(pose.source_position) || !room.contains(r))
    throw InfeasibleGeometryError("pose: positions must lie inside the room");
  const double wall_clearance =
      std::min({r.x, room.length_x - r.x, r.y, room.length_y - r.y, r.z,
                room.length_z - r.z});
  if (wall_clearance < kMinClearance)
    throw InfeasibleGeometryError("pose: receiver within 1 m of a wall");
  if (distance(r, pose.source_position) < kMinClearance)
    throw InfeasibleGeometryError("pose: receiver within 1 m of the source");
}

}  // namespace spinsim
