#include "spinsim/rir.hpp"

#include <cmath>
#include <cstdlib>

#include "spinsim/common.hpp"

namespace spinsim {

double RoomImpulseResponse::energy() const {
  double acc = 0.0;
  for (double t : taps) acc += t * t;
  return acc;
}

RoomImpulseResponse compute_rir(const RoomSpec& room, const Vec3& source,
                                const Vec3& mic, int max_order,
                                double sample_rate, double absorption) {
  room.validate();
  if (max_order < 0) throw ValidationError("rir: max_order must be >= 0");
  if (sample_rate <= 0.0) throw ValidationError("rir: bad sample rate");
  if (source == mic)
    throw InvalidGeometryError("rir: source and microphone coincide");
  if (!room.contains(source) || !room.contains(mic))
    throw InvalidGeometryError("rir: source/microphone outside the room");

  const double alpha =
      absorption < 0.0 ? absorption_from_rt60(room) : absorption;
  if (alpha <= 0.0 || alpha > 1.0)
    throw ValidationError("rir: absorption must lie in (0, 1]");
  const double beta = std::sqrt(1.0 - alpha);  // amplitude per reflection
  const double c = room.speed_of_sound;
  std::vector<double> beta_pow(static_cast<std::size_t>(max_order) + 1, 1.0);
  for (int n = 1; n <= max_order; ++n)
    beta_pow[static_cast<std::size_t>(n)] =
        beta_pow[static_cast<std::size_t>(n - 1)] * beta;

  const double len[3] = {room.length_x, room.length_y, room.length_z};
  const double src[3] = {source.x, source.y, source.z};
  const double rcv[3] = {mic.x, mic.y, mic.z};

  // Lattice index bound: each axis contributes |m - q| + |m| >= 2|m| - 1
  // reflections.
  const int m_max = (max_order + 1) / 2;

  struct Tap {
    long index;
    double amplitude;
  };
  std::vector<Tap> taps;
  taps.reserve(4096);
  long max_index = 0;

  for (int mx = -m_max; mx <= m_max; ++mx) {
    for (int qx = 0; qx <= 1; ++qx) {
      const int nx = std::abs(mx - qx) + std::abs(mx);
      if (nx > max_order) continue;
      const double ix = (1 - 2 * qx) * src[0] + 2.0 * mx * len[0];
      for (int my = -m_max; my <= m_max; ++my) {
        for (int qy = 0; qy <= 1; ++qy) {
          const int ny = std::abs(my - qy) + std::abs(my);
          if (nx + ny > max_order) continue;
          const double iy = (1 - 2 * qy) * src[1] + 2.0 * my * len[1];
          for (int mz = -m_max; mz <= m_max; ++mz) {
            for (int qz = 0; qz <= 1; ++qz) {
              const int n = nx + ny + std::abs(mz - qz) + std::abs(mz);
              if (n > max_order) continue;
              const double iz = (1 - 2 * qz) * src[2] + 2.0 * mz * len[2];

              const double dx = ix - rcv[0];
              const double dy = iy - rcv[1];
              const double dz = iz - rcv[2];
              const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
              if (d == 0.0)
                throw InvalidGeometryError(
                    "rir: degenerate zero-distance image path");

              const double amp = beta_pow[static_cast<std::size_t>(n)] / d;
              if (amp == 0.0) continue;  // fully absorbed reflection

              const long idx = std::lround(d / c * sample_rate);
              taps.push_back({idx, amp});
              if (idx > max_index) max_index = idx;
            }
          }
        }
      }
    }
  }

  RoomImpulseResponse rir;
  rir.sample_rate = sample_rate;
  rir.taps.assign(static_cast<std::size_t>(max_index) + 1, 0.0);
  for (const Tap& t : taps)
    rir.taps[static_cast<std::size_t>(t.index)] += t.amplitude;
  return rir;
}

}  // namespace spinsim
