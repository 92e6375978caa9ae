#include "spinsim/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace spinsim::dsp {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution on private
// buffers is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<std::complex<double>> rfft(std::span<const double> x,
                                       std::size_t nfft) {
  if (nfft == 0) throw std::invalid_argument("rfft: nfft == 0");
  std::vector<double> in(nfft, 0.0);
  std::copy_n(x.data(), std::min(x.size(), nfft), in.begin());
  std::vector<std::complex<double>> out(nfft / 2 + 1);

  fftw_plan plan = nullptr;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> spec,
                          std::size_t nfft) {
  if (nfft == 0) throw std::invalid_argument("irfft: nfft == 0");
  if (spec.size() != nfft / 2 + 1)
    throw std::invalid_argument("irfft: spectrum size mismatch");
  std::vector<std::complex<double>> in(spec.begin(), spec.end());
  std::vector<double> out(nfft);

  fftw_plan plan = nullptr;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(nfft),
                                reinterpret_cast<fftw_complex*>(in.data()),
                                out.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  const double scale = 1.0 / static_cast<double>(nfft);
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> fft_convolve(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t nfft = next_pow2(out_len);
  auto fa = rfft(a, nfft);
  const auto fb = rfft(b, nfft);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  auto full = irfft(fa, nfft);
  full.resize(out_len);
  return full;
}

std::vector<double> resample(std::span<const double> x, double fs_in,
                             double fs_out) {
  if (fs_in <= 0.0 || fs_out <= 0.0)
    throw std::invalid_argument("resample: non-positive sample rate");
  if (fs_in == fs_out) return {x.begin(), x.end()};

  const double ratio = fs_in / fs_out;  // input samples per output sample
  const std::size_t n_out =
      static_cast<std::size_t>(std::floor(x.size() * fs_out / fs_in));
  std::vector<double> y(n_out, 0.0);
  if (x.empty() || n_out == 0) {
    y.clear();
    return y;
  }

  // Anti-alias cutoff at the lower Nyquist; Kaiser beta 8 keeps stopband
  // leakage below the metric tolerances in use here.
  const double cutoff = 0.5 * std::min(fs_in, fs_out) / fs_in;  // cycles/sample
  const int base_halfwidth = 32;
  const int halfwidth = static_cast<int>(
      std::ceil(base_halfwidth * std::max(1.0, ratio)));
  const double beta = 8.0;

  auto bessel_i0 = [](double v) {
    // Series expansion; converges quickly for the betas used here.
    double sum = 1.0, term = 1.0;
    for (int k = 1; k < 40; ++k) {
      term *= (v / (2.0 * k)) * (v / (2.0 * k));
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return sum;
  };
  const double i0_beta = bessel_i0(beta);

  const auto n_in = static_cast<long long>(x.size());
  for (std::size_t m = 0; m < n_out; ++m) {
    const double center = m * ratio;
    const auto k0 = static_cast<long long>(std::ceil(center - halfwidth));
    const auto k1 = static_cast<long long>(std::floor(center + halfwidth));
    double acc = 0.0;
    for (long long k = std::max(0LL, k0); k <= std::min(n_in - 1, k1); ++k) {
      const double t = k - center;
      const double sinc_arg = 2.0 * cutoff * t;
      const double sinc = (sinc_arg == 0.0)
                              ? 1.0
                              : std::sin(kPi * sinc_arg) / (kPi * sinc_arg);
      const double w_arg = t / halfwidth;
      const double win =
          bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - w_arg * w_arg))) /
          i0_beta;
      acc += x[static_cast<std::size_t>(k)] * sinc * win * (2.0 * cutoff);
    }
    y[m] = acc;
  }
  return y;
}

int align_lag(std::span<const double> ref, std::span<const double> sig,
              int max_lag) {
  if (ref.empty() || sig.empty()) return 0;
  // Cross-correlate via FFT: corr[lag] = sum_n ref[n] * sig[n + lag].
  const std::size_t n = std::max(ref.size(), sig.size());
  const std::size_t nfft = next_pow2(2 * n);
  auto fr = rfft(ref, nfft);
  const auto fs = rfft(sig, nfft);
  for (std::size_t i = 0; i < fr.size(); ++i)
    fr[i] = std::conj(fr[i]) * fs[i];
  const auto corr = irfft(fr, nfft);  // index l holds lag +l (mod nfft)

  int best_lag = 0;
  double best = -1.0;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    const std::size_t idx =
        lag >= 0 ? static_cast<std::size_t>(lag) : nfft + lag;
    const double v = std::abs(corr[idx]);
    if (v > best) {
      best = v;
      best_lag = lag;
    }
  }
  return best_lag;
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

std::vector<double> frame_powers(std::span<const double> x,
                                 std::size_t frame_len) {
  if (frame_len == 0) throw std::invalid_argument("frame_powers: zero frame");
  const std::size_t n_frames = x.size() / frame_len;
  std::vector<double> powers(n_frames, 0.0);
  for (std::size_t f = 0; f < n_frames; ++f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < frame_len; ++i) {
      const double v = x[f * frame_len + i];
      acc += v * v;
    }
    powers[f] = acc / static_cast<double>(frame_len);
  }
  return powers;
}

std::vector<std::size_t> active_frames(const std::vector<double>& powers,
                                       double floor_db) {
  std::vector<std::size_t> idx;
  if (powers.empty()) return idx;
  const double peak = *std::max_element(powers.begin(), powers.end());
  if (peak <= 0.0) return idx;
  const double thresh = peak * std::pow(10.0, floor_db / 10.0);
  for (std::size_t i = 0; i < powers.size(); ++i)
    if (powers[i] >= thresh) idx.push_back(i);
  return idx;
}

std::vector<double> smooth_envelope(std::span<const double> x,
                                    double sample_rate, double tau_seconds) {
  std::vector<double> env(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) env[i] = std::abs(x[i]);
  if (env.empty() || tau_seconds <= 0.0) return env;
  const double alpha = std::exp(-1.0 / (tau_seconds * sample_rate));
  double state = 0.0;
  for (std::size_t i = 0; i < env.size(); ++i) {
    state = alpha * state + (1.0 - alpha) * env[i];
    env[i] = state;
  }
  state = 0.0;
  for (std::size_t i = env.size(); i-- > 0;) {
    state = alpha * state + (1.0 - alpha) * env[i];
    env[i] = state;
  }
  return env;
}

HighShelf::HighShelf(double corner_hz, double high_gain_db, double sample_rate)
    : corner_hz_(corner_hz),
      high_gain_db_(high_gain_db),
      sample_rate_(sample_rate) {
  const double g = db_to_amp(high_gain_db);
  const double k = std::tan(kPi * corner_hz / sample_rate);
  b0_ = (k + g) / (k + 1.0);
  b1_ = (k - g) / (k + 1.0);
  a1_ = (k - 1.0) / (k + 1.0);
}

void HighShelf::process_inplace(std::vector<double>& x) const {
  double x1 = 0.0, y1 = 0.0;
  for (double& v : x) {
    const double y = b0_ * v + b1_ * x1 - a1_ * y1;
    x1 = v;
    y1 = y;
    v = y;
  }
}

double HighShelf::gain_at(double f_hz) const {
  const std::complex<double> z =
      std::exp(std::complex<double>(0.0, -2.0 * kPi * f_hz / sample_rate_));
  const std::complex<double> h = (b0_ + b1_ * z) / (1.0 + a1_ * z);
  return std::abs(h);
}

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n, 0.0);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / (n - 1));
  return w;
}

}  // namespace spinsim::dsp
