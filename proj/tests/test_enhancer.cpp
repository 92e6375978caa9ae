#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "spinsim/audiogram.hpp"
#include "spinsim/causality.hpp"
#include "spinsim/common.hpp"
#include "spinsim/dsp.hpp"
#include "spinsim/enhancer.hpp"
#include "spinsim/rng.hpp"
#include "spinsim/scoring.hpp"

using namespace spinsim;

namespace {

Audiogram flat_audiogram(double hl, const std::string& id = "L") {
  Audiogram a;
  a.listener_id = id;
  a.left.fill(hl);
  a.right.fill(hl);
  return a;
}

SpinSignalSet binaural_scene(const std::vector<double>& left,
                             const std::vector<double>& right, double fs) {
  SpinSignalSet s;
  s.scene_id = "S_enh";
  s.sample_rate = fs;
  s.labels = {{Ear::left, 0}, {Ear::right, 0}};
  s.mixture = {left, right};
  s.reference = left;
  s.transcript = "words";
  return s;
}

std::vector<double> noise(std::size_t n, std::uint64_t seed, double rms_target) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  const double g = rms_target / dsp::rms(x);
  for (double& v : x) v *= g;
  return x;
}

// Sample-shift processor: positive = delay, negative = looks into the future.
Processor shift_processor(long samples) {
  return [samples](const wav::WavData& in) {
    wav::WavData out = in;
    for (std::vector<double>& ch : out.channels) {
      std::vector<double> y(ch.size(), 0.0);
      for (std::size_t i = 0; i < ch.size(); ++i) {
        const long j = static_cast<long>(i) - samples;
        if (j >= 0 && j < static_cast<long>(ch.size())) {
          y[i] = ch[static_cast<std::size_t>(j)];
        }
      }
      ch = std::move(y);
    }
    return out;
  };
}

}  // namespace

TEST_CASE("processor config validation") {
  ProcessorConfig c;
  CHECK_NOTHROW(c.validate());

  ProcessorConfig bad = c;
  bad.crossover_hz.pop_back();
  CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);

  bad = c;
  std::swap(bad.crossover_hz[1], bad.crossover_hz[2]);
  CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);

  bad = c;
  bad.fir_taps = 128;
  CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);

  bad = c;
  bad.lookahead_ms = 6.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);

  bad = c;
  bad.lookahead_ms = -0.1;
  CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);

  bad = c;
  bad.compression_ratio = 0.5;
  CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);

  bad = c;
  bad.threshold_dbfs = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);

  bad = c;
  bad.attack_ms = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgumentError);
}

TEST_CASE("processor config JSON round trip") {
  ProcessorConfig c;
  c.fir_taps = 65;
  c.attack_ms = 3.0;
  c.release_ms = 80.0;
  c.lookahead_ms = 2.5;
  c.threshold_dbfs = -24.0;
  c.compression_ratio = 3.0;
  const ProcessorConfig back = processor_config_from_json(processor_config_to_json(c));
  CHECK(back.crossover_hz == c.crossover_hz);
  CHECK(back.fir_taps == c.fir_taps);
  CHECK(back.attack_ms == c.attack_ms);
  CHECK(back.release_ms == c.release_ms);
  CHECK(back.lookahead_ms == c.lookahead_ms);
  CHECK(back.threshold_dbfs == c.threshold_dbfs);
  CHECK(back.compression_ratio == c.compression_ratio);

  nlohmann::json j = processor_config_to_json(c);
  j["lookahead_ms"] = 9.0;
  CHECK_THROWS_AS(processor_config_from_json(j), ValidationError);
  j = processor_config_to_json(c);
  j["fir_taps"] = "many";
  CHECK_THROWS_AS(processor_config_from_json(j), SchemaError);
}

TEST_CASE("silence in, silence out") {
  const double fs = 16000.0;
  const std::vector<double> zeros(8000, 0.0);
  const SpinSignalSet scene = binaural_scene(zeros, zeros, fs);
  const EnhancedOutput out = enhance(scene, ProcessorConfig{}, flat_audiogram(40.0));
  REQUIRE(out.left.size() == zeros.size());
  REQUIRE(out.right.size() == zeros.size());
  for (double v : out.left) CHECK(v == 0.0);
  for (double v : out.right) CHECK(v == 0.0);
}

TEST_CASE("transparent configuration reduces to the filterbank delay") {
  const double fs = 16000.0;
  const std::vector<double> x = noise(9000, 5, 0.05);
  const SpinSignalSet scene = binaural_scene(x, x, fs);
  ProcessorConfig c;
  c.compression_ratio = 1.0;  // disables the level-dependent path
  const EnhancedOutput out = enhance(scene, c, flat_audiogram(0.0));

  const long d = out.latency_samples;
  CHECK(d == static_cast<long>((c.fir_taps - 1) / 2));
  double worst = 0.0;
  std::vector<double> in_slice, out_slice;
  for (std::size_t i = static_cast<std::size_t>(d); i < x.size(); ++i) {
    worst = std::max(worst, std::abs(out.left[i] - x[i - static_cast<std::size_t>(d)]));
    in_slice.push_back(x[i - static_cast<std::size_t>(d)]);
    out_slice.push_back(out.left[i]);
  }
  CHECK(worst < 1e-9);
  const double drift_db =
      20.0 * std::log10(dsp::rms(out_slice) / dsp::rms(in_slice));
  CHECK(std::abs(drift_db) < 0.1);
}

TEST_CASE("static path is linear in the input") {
  const double fs = 16000.0;
  const std::vector<double> a = noise(6000, 6, 0.05);
  const std::vector<double> b = noise(6000, 7, 0.02);
  std::vector<double> sum(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) sum[i] = a[i] + b[i];

  ProcessorConfig c;
  c.compression_ratio = 1.0;
  const Audiogram listener = flat_audiogram(35.0);
  const EnhancedOutput ya = enhance(binaural_scene(a, a, fs), c, listener);
  const EnhancedOutput yb = enhance(binaural_scene(b, b, fs), c, listener);
  const EnhancedOutput ysum = enhance(binaural_scene(sum, sum, fs), c, listener);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(ysum.left[i] == doctest::Approx(ya.left[i] + yb.left[i]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("compression narrows the quiet-to-loud spread") {
  const double fs = 16000.0;
  const std::size_t n = 16000;
  std::vector<double> x = noise(n, 8, 1.0);
  for (std::size_t i = 0; i < n; ++i) x[i] *= i < n / 2 ? 0.005 : 0.15;

  ProcessorConfig compress;
  compress.compression_ratio = 3.0;
  compress.threshold_dbfs = -35.0;
  ProcessorConfig linear = compress;
  linear.compression_ratio = 1.0;

  const Audiogram listener = flat_audiogram(0.0);
  const EnhancedOutput yc = enhance(binaural_scene(x, x, fs), compress, listener);
  const EnhancedOutput yl = enhance(binaural_scene(x, x, fs), linear, listener);

  const auto spread_db = [n](const std::vector<double>& v) {
    std::vector<double> quiet(v.begin() + 2000, v.begin() + n / 2);
    std::vector<double> loud(v.begin() + static_cast<std::ptrdiff_t>(n / 2) + 2000, v.end());
    return 20.0 * std::log10(dsp::rms(loud) / dsp::rms(quiet));
  };
  CHECK(spread_db(yc.left) < spread_db(yl.left) - 3.0);
}

TEST_CASE("microphones are averaged per ear before processing") {
  const double fs = 16000.0;
  const std::vector<double> s = noise(6000, 9, 0.05);
  const std::vector<double> d = noise(6000, 10, 0.03);
  std::vector<double> plus(s.size()), minus(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    plus[i] = s[i] + d[i];
    minus[i] = s[i] - d[i];
  }

  SpinSignalSet two_mics;
  two_mics.scene_id = "S_avg";
  two_mics.sample_rate = fs;
  two_mics.labels = {{Ear::left, 0}, {Ear::left, 1}, {Ear::right, 0}, {Ear::right, 1}};
  two_mics.mixture = {plus, minus, s, s};

  ProcessorConfig c;
  c.compression_ratio = 1.0;
  const Audiogram listener = flat_audiogram(20.0);
  const EnhancedOutput out = enhance(two_mics, c, listener);
  // (s+d)/2 + (s-d)/2 == s, so both ears must match exactly.
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(out.left[i] == doctest::Approx(out.right[i]).epsilon(1e-12).scale(1.0));
  }

  SpinSignalSet missing;
  missing.scene_id = "S_bad";
  missing.sample_rate = fs;
  missing.labels = {{Ear::left, 0}};
  missing.mixture = {s};
  CHECK_THROWS_AS(enhance(missing, c, listener), MalformedInputError);
}

TEST_CASE("passthrough hands back the front microphones untouched") {
  const double fs = 16000.0;
  const std::vector<double> l = noise(4000, 11, 0.05);
  const std::vector<double> r = noise(4000, 12, 0.05);
  SpinSignalSet scene = binaural_scene(l, r, fs);
  scene.labels.push_back({Ear::left, 1});
  scene.mixture.push_back(noise(4000, 13, 0.5));

  const Audiogram listener = flat_audiogram(45.0, "P007");
  const EnhancedOutput out = passthrough(scene, listener);
  CHECK(out.left == l);
  CHECK(out.right == r);
  CHECK(out.latency_samples == 0);
  CHECK(out.scene_id == "S_enh");
  CHECK(out.listener_id == "P007");
  CHECK(out.sample_rate == fs);
  CHECK(out.ear(Ear::left) == l);
  CHECK(out.ear(Ear::right) == r);
}

TEST_CASE("prescribed gain actually lifts the bands for an impaired listener") {
  const double fs = 16000.0;
  const std::vector<double> x = noise(9000, 14, 0.01);
  ProcessorConfig c;
  c.compression_ratio = 1.0;
  const EnhancedOutput flat0 = enhance(binaural_scene(x, x, fs), c, flat_audiogram(0.0));
  const EnhancedOutput flat50 = enhance(binaural_scene(x, x, fs), c, flat_audiogram(50.0));
  CHECK(dsp::rms(flat50.left) > dsp::rms(flat0.left) * 2.0);
}

TEST_CASE("causality verifier accepts a 10 ms delay") {
  const double fs = 16000.0;
  const CausalityReport report =
      verify_causality(shift_processor(160), fs, 5.0);  // 10 ms of delay
  CHECK(report.passed);
  CHECK(report.measured_lookahead_ms <= 0.0);
  CHECK(report.limit_ms == 5.0);
  CHECK(report.cuts_tested == 40);
}

TEST_CASE("causality verifier pins a 6 ms advance to the sample") {
  const double fs = 16000.0;
  const CausalityReport report =
      verify_causality(shift_processor(-96), fs, 5.0);  // reads 6 ms ahead
  CHECK_FALSE(report.passed);
  const double sample_ms = 1000.0 / fs;
  CHECK(report.measured_lookahead_ms >= 6.0 - sample_ms);
  CHECK(report.measured_lookahead_ms <= 6.0 + sample_ms);
}

TEST_CASE("a 4 ms look-ahead smoother stays inside the 5 ms budget") {
  const double fs = 16000.0;
  const long half = 64;  // 4 ms at 16 kHz
  const Processor smoother = [half](const wav::WavData& in) {
    wav::WavData out = in;
    for (std::vector<double>& ch : out.channels) {
      const std::vector<double> x = ch;
      const long n = static_cast<long>(x.size());
      for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        long cnt = 0;
        for (long j = std::max(0l, i - half); j <= std::min(n - 1, i + half); ++j) {
          acc += x[static_cast<std::size_t>(j)];
          ++cnt;
        }
        ch[static_cast<std::size_t>(i)] = acc / static_cast<double>(cnt);
      }
    }
    return out;
  };
  const CausalityReport report = verify_causality(smoother, fs, 5.0);
  CHECK(report.passed);
  CHECK(report.measured_lookahead_ms == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("nondeterministic processors cannot be verified") {
  int calls = 0;
  const Processor jittery = [&calls](const wav::WavData& in) {
    wav::WavData out = in;
    Rng rng(static_cast<std::uint64_t>(++calls));
    for (std::vector<double>& ch : out.channels) {
      for (double& v : ch) v += 0.01 * rng.normal();
    }
    return out;
  };
  CHECK_THROWS_AS(verify_causality(jittery, 16000.0, 5.0), CannotVerifyError);

  const Processor empty = [](const wav::WavData&) { return wav::WavData{}; };
  CHECK_THROWS_AS(verify_causality(empty, 16000.0, 5.0), CannotVerifyError);
  CHECK_THROWS_AS(verify_causality(Processor{}, 16000.0, 5.0), InvalidArgumentError);
}

TEST_CASE("the baseline enhancer passes the gate for 100 random configs") {
  const double fs = 16000.0;
  CausalityProbeOptions probe;
  probe.cut_count = 6;
  probe.duration_s = 0.4;

  Rng rng(31);
  const std::size_t taps_choices[] = {33, 65, 97, 129};
  for (int trial = 0; trial < 100; ++trial) {
    ProcessorConfig c;
    c.fir_taps = taps_choices[rng.uniform_int(0, 3)];
    c.attack_ms = rng.uniform(0.5, 20.0);
    c.release_ms = rng.uniform(20.0, 200.0);
    c.lookahead_ms = rng.uniform(0.0, 5.0);
    c.threshold_dbfs = rng.uniform(-45.0, -15.0);
    c.compression_ratio = rng.uniform(1.0, 4.0);
    c.validate();
    const Processor p = resolve_processor("builtin:baseline", c, {});
    const CausalityReport report = verify_causality(p, fs, 5.0, probe);
    CHECK_MESSAGE(report.passed, "trial ", trial, " lookahead ",
                  report.measured_lookahead_ms, " ms");
  }

  const Processor pass = resolve_processor("builtin:passthrough", ProcessorConfig{}, {});
  CHECK(verify_causality(pass, fs, 5.0, probe).passed);
}

TEST_CASE("external command processors run through temp WAV files") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "spinsim_cmdproc";
  std::filesystem::create_directories(dir);
  const Processor copy = command_processor("cp {in} {out}", dir);
  CausalityProbeOptions probe;
  probe.cut_count = 4;
  probe.duration_s = 0.3;
  const CausalityReport report = verify_causality(copy, 16000.0, 5.0, probe);
  CHECK(report.passed);
  CHECK(report.measured_lookahead_ms <= 0.0);
  std::filesystem::remove_all(dir);
}
