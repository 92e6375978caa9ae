#pragma once

#include <filesystem>
#include <vector>

namespace spinsim::wav {

struct WavData {
  double sample_rate = 0.0;
  // channels[c][n]; deinterleaved.
  std::vector<std::vector<double>> channels;

  std::size_t frames() const {
    return channels.empty() ? 0 : channels.front().size();
  }
};

// RIFF/WAVE, 32-bit IEEE float little-endian. Write always emits float32;
// read also accepts 16/24-bit PCM and float64.
void write(const std::filesystem::path& path, const WavData& data);
WavData read(const std::filesystem::path& path);

}  // namespace spinsim::wav
