#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace spinsim::dsp {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

std::size_t next_pow2(std::size_t n);

// Real-input FFT, n/2+1 bins. n may be any length >= 1 (FFTW backend).
// Thread-safe; plan creation is serialized internally.
std::vector<std::complex<double>> rfft(std::span<const double> x,
                                       std::size_t nfft);

// Inverse of rfft, already scaled by 1/nfft.
std::vector<double> irfft(std::span<const std::complex<double>> spec,
                          std::size_t nfft);

// Linear convolution via zero-padded FFT; result length |a| + |b| - 1.
std::vector<double> fft_convolve(std::span<const double> a,
                                 std::span<const double> b);

// Windowed-sinc rational resampler (Kaiser window). Output length
// floor(n_in * fs_out / fs_in).
std::vector<double> resample(std::span<const double> x, double fs_in,
                             double fs_out);

// Lag (in samples) that best aligns `sig` to `ref` by cross-correlation,
// searched over [-max_lag, max_lag]. Positive lag means `sig` is late.
int align_lag(std::span<const double> ref, std::span<const double> sig,
              int max_lag);

double rms(std::span<const double> x);

inline double amp_to_db(double a) { return 20.0 * std::log10(a); }
inline double db_to_amp(double db) { return std::pow(10.0, db / 20.0); }
inline double pow_to_db(double p) { return 10.0 * std::log10(p); }

// Mean power per non-overlapping frame.
std::vector<double> frame_powers(std::span<const double> x,
                                 std::size_t frame_len);

// Frame indices whose power is within `floor_db` of the loudest frame.
std::vector<std::size_t> active_frames(const std::vector<double>& powers,
                                       double floor_db);

// Rectified envelope smoothed by a forward+backward one-pole (zero-phase).
std::vector<double> smooth_envelope(std::span<const double> x,
                                    double sample_rate, double tau_seconds);

// First-order high shelf: unity gain at DC, `high_gain` (linear) at Nyquist,
// transition around corner_hz.
class HighShelf {
public:
  HighShelf(double corner_hz, double high_gain_db, double sample_rate);

  void process_inplace(std::vector<double>& x) const;
  // Magnitude response at frequency f (Hz).
  double gain_at(double f_hz) const;
  double high_gain_db() const { return high_gain_db_; }

private:
  double b0_ = 1.0, b1_ = 0.0, a1_ = 0.0;
  double corner_hz_ = 0.0, high_gain_db_ = 0.0, sample_rate_ = 0.0;
};

// Hann window of length n (periodic flag off: symmetric).
std::vector<double> hann(std::size_t n);

}  // namespace spinsim::dsp
