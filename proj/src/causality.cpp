#include "spinsim/causality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "spinsim/common.hpp"
#include "spinsim/rng.hpp"

namespace spinsim {

namespace {

wav::WavData make_probe(double fs, const CausalityProbeOptions& opt, std::size_t n,
                   std::size_t cut, std::uint64_t tail_salt) {
  wav::WavData w;
  w.sample_rate = fs;
  w.channels.resize(static_cast<std::size_t>(opt.channels));
  for (int c = 0; c < opt.channels; ++c) {
    Rng head(derive_seed(opt.seed, "head" + std::to_string(c)));
    Rng tail(derive_seed(opt.seed, "tail" + std::to_string(c) + "#" + std::to_string(tail_salt)));
    std::vector<double>& ch = w.channels[static_cast<std::size_t>(c)];
    ch.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      ch[i] = 0.25 * (i < cut ? head.normal() : tail.normal());
    }
  }
  return w;
}

// First sample index where the two outputs differ beyond the tolerance,
// or -1 when they agree everywhere.
long first_difference(const wav::WavData& a, const wav::WavData& b, double tol_rel) {
  const std::size_t chans = std::min(a.channels.size(), b.channels.size());
  if (chans == 0) return -1;
  double peak = 1e-9;
  for (const std::vector<double>& ch : a.channels) {
    for (double v : ch) peak = std::max(peak, std::abs(v));
  }
  const double tol = tol_rel * peak;
  std::size_t n = 0;
  for (std::size_t c = 0; c < chans; ++c) {
    n = std::max(n, std::min(a.channels[c].size(), b.channels[c].size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < chans; ++c) {
      const std::vector<double>& x = a.channels[c];
      const std::vector<double>& y = b.channels[c];
      if (i >= x.size() || i >= y.size()) continue;
      if (std::abs(x[i] - y[i]) > tol) return static_cast<long>(i);
    }
  }
  return -1;
}

}  // namespace

CausalityReport verify_causality(const Processor& processor, double sample_rate,
                                 double max_lookahead_ms,
                                 const CausalityProbeOptions& options) {
  if (!processor) throw InvalidArgumentError("no processor given");
  if (sample_rate <= 0.0) throw InvalidArgumentError("sample rate must be positive");
  if (!(max_lookahead_ms >= 0.0)) throw InvalidArgumentError("lookahead limit must be non-negative");
  if (options.cut_count < 1 || options.channels < 1 || !(options.duration_s > 0.0)) {
    throw InvalidArgumentError("bad probe options");
  }

  const std::size_t n =
      static_cast<std::size_t>(std::lround(options.duration_s * sample_rate));
  if (n < 16) throw InvalidArgumentError("probe too short");

  const wav::WavData base = make_probe(sample_rate, options, n, n, 0);
  const wav::WavData ref_a = processor(base);
  const wav::WavData ref_b = processor(base);
  if (ref_a.channels.empty() || ref_a.frames() == 0) {
    throw CannotVerifyError("processor produced no output");
  }
  if (first_difference(ref_a, ref_b, options.tolerance_rel) >= 0) {
    throw CannotVerifyError("processor is not deterministic; causality cannot be decided");
  }

  const double limit_samples = max_lookahead_ms * sample_rate / 1000.0;
  double worst = 0.0;
  for (int k = 0; k < options.cut_count; ++k) {
    const std::size_t cut =
        static_cast<std::size_t>((static_cast<unsigned long long>(k) + 1) * n /
                                 (static_cast<unsigned long long>(options.cut_count) + 1));
    const wav::WavData variant = make_probe(sample_rate, options, n, cut,
                                       static_cast<std::uint64_t>(k) + 1);
    const wav::WavData out = processor(variant);
    const long i = first_difference(ref_a, out, options.tolerance_rel);
    if (i < 0) continue;
    const double lookahead = static_cast<double>(cut) - static_cast<double>(i);
    worst = std::max(worst, lookahead);
  }

  CausalityReport report;
  report.limit_ms = max_lookahead_ms;
  report.cuts_tested = options.cut_count;
  report.measured_lookahead_ms = worst * 1000.0 / sample_rate;
  report.passed = !(worst > limit_samples);
  return report;
}

Processor command_processor(const std::string& command_template,
                            const std::filesystem::path& workdir) {
  if (command_template.find("{in}") == std::string::npos ||
      command_template.find("{out}") == std::string::npos) {
    throw InvalidArgumentError("processor command needs {in} and {out} placeholders");
  }
  std::filesystem::create_directories(workdir);
  return [command_template, workdir](const wav::WavData& input) -> wav::WavData {
    const std::filesystem::path in_path = workdir / "probe_in.wav";
    const std::filesystem::path out_path = workdir / "probe_out.wav";
    std::error_code ec;
    std::filesystem::remove(out_path, ec);
    wav::write(in_path, input);
    std::string cmd = command_template;
    for (;;) {
      const std::size_t p = cmd.find("{in}");
      if (p == std::string::npos) break;
      cmd.replace(p, 4, in_path.string());
    }
    for (;;) {
      const std::size_t p = cmd.find("{out}");
      if (p == std::string::npos) break;
      cmd.replace(p, 5, out_path.string());
    }
    const int rc = std::system(cmd.c_str());
    if (rc != 0) throw CannotVerifyError("processor command failed: " + cmd);
    if (!std::filesystem::exists(out_path)) {
      throw CannotVerifyError("processor command produced no output file");
    }
    return wav::read(out_path);
  };
}

}  // namespace spinsim
