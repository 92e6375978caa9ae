#include "spinsim/band_filter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "spinsim/common.hpp"
#include "spinsim/dsp.hpp"

namespace spinsim {

using namespace dsp;

BandMasks::BandMasks(std::vector<double> edges_hz, double transition_octaves)
    : edges_(std::move(edges_hz)) {
  if (edges_.empty()) throw InvalidArgumentError("band masks need at least one edge");
  if (!(transition_octaves > 0.0)) {
    throw InvalidArgumentError("band transition width must be positive");
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (!(edges_[i] > 0.0)) throw InvalidArgumentError("band edges must be positive");
    if (i > 0 && !(edges_[i] > edges_[i - 1])) {
      throw InvalidArgumentError("band edges must be ascending");
    }
  }
  log_width_ = std::log(2.0) * transition_octaves;
}

namespace {

// 0 well below the edge, 1 well above, raised-cosine in between.
double edge_crossfade(double hz, double edge, double log_width) {
  if (!(hz > 0.0)) return 0.0;
  const double s = std::clamp((std::log(hz) - std::log(edge)) / log_width + 0.5, 0.0, 1.0);
  const double t = std::sin(0.5 * kPi * s);
  return t * t;
}

}  // namespace

double BandMasks::weight(std::size_t b, double hz) const {
  const std::size_t e = edges_.size();
  if (b > e) throw InvalidArgumentError("band index out of range");
  const double above_lo = b == 0 ? 1.0 : edge_crossfade(hz, edges_[b - 1], log_width_);
  const double above_hi = b == e ? 0.0 : edge_crossfade(hz, edges_[b], log_width_);
  return above_lo - above_hi;
}

std::vector<double> geometric_edges(const std::vector<double>& centres_hz) {
  if (centres_hz.size() < 2) throw InvalidArgumentError("need at least two band centres");
  std::vector<double> edges;
  edges.reserve(centres_hz.size() - 1);
  for (std::size_t i = 0; i + 1 < centres_hz.size(); ++i) {
    edges.push_back(std::sqrt(centres_hz[i] * centres_hz[i + 1]));
  }
  return edges;
}

std::vector<std::vector<double>> design_fir_bank(const BandMasks& masks, double sample_rate,
                                                 std::size_t taps) {
  if (taps < 3 || taps % 2 == 0) throw InvalidArgumentError("FIR bank needs an odd tap count >= 3");
  if (sample_rate <= 0.0) throw InvalidArgumentError("FIR bank sample rate must be positive");
  const std::size_t nfft = std::max<std::size_t>(8192, next_pow2(taps * 8));
  const std::size_t delay = (taps - 1) / 2;
  const std::size_t bins = nfft / 2 + 1;
  std::vector<std::vector<double>> bank;
  bank.reserve(masks.band_count());
  for (std::size_t b = 0; b < masks.band_count(); ++b) {
    std::vector<std::complex<double>> spec(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
      const double w = masks.weight(b, hz);
      const double phase = -2.0 * kPi * static_cast<double>(k) * static_cast<double>(delay) /
                           static_cast<double>(nfft);
      spec[k] = std::polar(w, phase);
    }
    std::vector<double> h = irfft(spec, nfft);
    h.resize(taps);
    bank.push_back(std::move(h));
  }
  return bank;
}

}  // namespace spinsim
