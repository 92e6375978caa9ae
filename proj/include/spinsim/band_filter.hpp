#pragma once

#include <cstddef>
#include <vector>

namespace spinsim {

// Frequency-domain weights for a bank of contiguous bands that sum to one
// at every frequency (raised-cosine crossfades on a log axis). Used both
// by the zero-phase analysis bank and the causal FIR bank.
class BandMasks {
public:
  // `edges_hz` are the interior crossover frequencies, ascending. The first
  // band extends down to 0 Hz and the last up to Nyquist.
  BandMasks(std::vector<double> edges_hz, double transition_octaves = 1.0 / 3.0);

  std::size_t band_count() const { return edges_.size() + 1; }
  // Weight of band `b` at frequency `hz`; over bands the weights sum to 1.
  double weight(std::size_t b, double hz) const;

private:
  std::vector<double> edges_;
  double log_width_;
};

// Geometric midpoints between consecutive centre frequencies.
std::vector<double> geometric_edges(const std::vector<double>& centres_hz);

// Linear-phase FIR filters, one per band, whose sum is an exact unit
// impulse delayed by (taps-1)/2 samples.
std::vector<std::vector<double>> design_fir_bank(const BandMasks& masks, double sample_rate,
                                                 std::size_t taps);

}  // namespace spinsim
