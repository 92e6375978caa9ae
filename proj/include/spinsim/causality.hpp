#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include "spinsim/wav.hpp"

namespace spinsim {

// Black-box audio transform under test: multichannel in, multichannel out.
using Processor = std::function<wav::WavData(const wav::WavData&)>;

struct CausalityProbeOptions {
  int cut_count = 40;          // number of probe positions across the signal
  double duration_s = 1.5;     // probe length
  int channels = 1;            // probe channel count
  double tolerance_rel = 1e-5; // diff threshold relative to output peak
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

struct CausalityReport {
  bool passed = false;
  double measured_lookahead_ms = 0.0;  // largest lookahead observed at any cut
  double limit_ms = 0.0;
  int cuts_tested = 0;
};

// Decide whether `processor` uses samples more than `max_lookahead_ms` into
// the future. Probe pairs share a prefix and differ only after a cut point;
// any output divergence earlier than (cut - limit) is a violation. The
// processor must be deterministic, otherwise CannotVerifyError is thrown.
// Calls are serialised: the processor is never invoked concurrently.
CausalityReport verify_causality(const Processor& processor, double sample_rate,
                                 double max_lookahead_ms = 5.0,
                                 const CausalityProbeOptions& options = {});

// Wrap an external command as a Processor. The template must contain the
// placeholders {in} and {out}, replaced by WAV paths inside `workdir`.
Processor command_processor(const std::string& command_template,
                            const std::filesystem::path& workdir);

}  // namespace spinsim
