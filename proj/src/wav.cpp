#include "spinsim/wav.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "spinsim/common.hpp"

namespace spinsim::wav {

namespace {

void put_u32(std::ofstream& f, std::uint32_t v) {
  std::array<char, 4> b{static_cast<char>(v & 0xff),
                        static_cast<char>((v >> 8) & 0xff),
                        static_cast<char>((v >> 16) & 0xff),
                        static_cast<char>((v >> 24) & 0xff)};
  f.write(b.data(), 4);
}

void put_u16(std::ofstream& f, std::uint16_t v) {
  std::array<char, 2> b{static_cast<char>(v & 0xff),
                        static_cast<char>((v >> 8) & 0xff)};
  f.write(b.data(), 2);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] |
                                    (static_cast<std::uint16_t>(p[1]) << 8));
}

}  // namespace

void write(const std::filesystem::path& path, const WavData& data) {
  if (data.channels.empty())
    throw IoError("wav: refusing to write file with no channels: " +
                  path.string());
  const std::size_t frames = data.frames();
  for (const auto& ch : data.channels)
    if (ch.size() != frames)
      throw IoError("wav: channel length mismatch writing " + path.string());

  const auto n_channels = static_cast<std::uint16_t>(data.channels.size());
  const auto byte_rate = static_cast<std::uint32_t>(
      data.sample_rate * n_channels * sizeof(float));
  const auto data_bytes =
      static_cast<std::uint32_t>(frames * n_channels * sizeof(float));

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("wav: cannot open for write: " + path.string());

  f.write("RIFF", 4);
  put_u32(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(f, 16);
  put_u16(f, 3);  // IEEE float
  put_u16(f, n_channels);
  put_u32(f, static_cast<std::uint32_t>(data.sample_rate));
  put_u32(f, byte_rate);
  put_u16(f, static_cast<std::uint16_t>(n_channels * sizeof(float)));
  put_u16(f, 32);
  f.write("data", 4);
  put_u32(f, data_bytes);

  std::vector<float> interleaved(n_channels);
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < n_channels; ++c)
      interleaved[c] = static_cast<float>(data.channels[c][n]);
    f.write(reinterpret_cast<const char*>(interleaved.data()),
            static_cast<std::streamsize>(n_channels * sizeof(float)));
  }
  if (!f) throw IoError("wav: write failed: " + path.string());
}

WavData read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("wav: cannot open: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw IoError("wav: not a RIFF/WAVE file: " + path.string());

  std::uint16_t format = 0, n_channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  std::size_t data_off = 0, data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t size = get_u32(bytes.data() + pos + 4);
    if (std::memcmp(id, "fmt ", 4) == 0 && pos + 8 + 16 <= bytes.size()) {
      const unsigned char* p = bytes.data() + pos + 8;
      format = get_u16(p);
      n_channels = get_u16(p + 2);
      sample_rate = get_u32(p + 4);
      bits = get_u16(p + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = pos + 8;
      data_len = std::min<std::size_t>(size, bytes.size() - data_off);
    }
    pos += 8 + size + (size & 1);
  }

  if (n_channels == 0 || data_off == 0)
    throw IoError("wav: missing fmt/data chunk: " + path.string());
  const bool is_float = (format == 3);
  const bool is_pcm = (format == 1);
  if (!is_float && !is_pcm)
    throw IoError("wav: unsupported format tag: " + path.string());

  const std::size_t bytes_per_sample = bits / 8;
  if (bytes_per_sample == 0)
    throw IoError("wav: bad bit depth: " + path.string());
  const std::size_t total_samples = data_len / bytes_per_sample;
  const std::size_t frames = total_samples / n_channels;

  WavData out;
  out.sample_rate = sample_rate;
  out.channels.assign(n_channels, std::vector<double>(frames, 0.0));

  const unsigned char* d = bytes.data() + data_off;
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < n_channels; ++c) {
      const unsigned char* p = d + (n * n_channels + c) * bytes_per_sample;
      double v = 0.0;
      if (is_float && bits == 32) {
        float fv;
        std::memcpy(&fv, p, 4);
        v = fv;
      } else if (is_float && bits == 64) {
        double dv;
        std::memcpy(&dv, p, 8);
        v = dv;
      } else if (is_pcm && bits == 16) {
        const auto iv = static_cast<std::int16_t>(get_u16(p));
        v = iv / 32768.0;
      } else if (is_pcm && bits == 24) {
        std::int32_t iv = p[0] | (p[1] << 8) | (p[2] << 16);
        if (iv & 0x800000) iv |= ~0xffffff;
        v = iv / 8388608.0;
      } else {
        throw IoError("wav: unsupported sample layout: " + path.string());
      }
      out.channels[c][n] = v;
    }
  }
  return out;
}

}  // namespace spinsim::wav
