#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "spinsim/common.hpp"
#include "spinsim/corpus.hpp"
#include "spinsim/dsp.hpp"
#include "spinsim/render.hpp"
#include "spinsim/rng.hpp"
#include "spinsim/scene_spec.hpp"

using namespace spinsim;

namespace {

double rms_db(const std::vector<double>& x) {
  const double r = dsp::rms(x);
  return 20.0 * std::log10(std::max(r, 1e-30));
}

// Test scene at a reduced rate and reflection order so renders stay quick.
SceneSpec make_scene(const UtteranceSource& corpus) {
  SceneSpec spec;
  spec.scene_id = "S_test";
  spec.split = "train";
  spec.seed = 11;
  spec.absorption = 0.35;
  spec.pose.source_position = {4.2, 3.1, 1.2};
  spec.pose.receiver_position = {2.0, 2.0, 1.2};
  const Vec3 d = spec.pose.source_position - spec.pose.receiver_position;
  spec.pose.receiver_yaw = std::atan2(d.y, d.x);
  spec.head = HeadGeometry::with_mics(3);
  spec.target_utterance_id = corpus.ids().front();
  spec.sample_rate = 16000.0;
  spec.max_reflection_order = 6;
  return spec;
}

InterfererSpec make_interferer() {
  InterfererSpec it;
  it.type = InterfererType::noise;
  it.position = {1.5, 3.8, 1.2};
  it.snr_db = 3.0;
  it.seed = 99;
  return it;
}

// Independent SNR re-measurement written from the definition: mean frame
// power ratio over the target-active frames, 10 ms frames, -40 dB floor.
double measure_snr_db(const std::vector<double>& target,
                      const std::vector<double>& interferer, double fs) {
  const std::size_t frame = static_cast<std::size_t>(std::lround(0.010 * fs));
  const std::size_t count = target.size() / frame;
  std::vector<double> pt(count), pi(count);
  double peak = 0.0;
  for (std::size_t f = 0; f < count; ++f) {
    double st = 0.0, si = 0.0;
    for (std::size_t i = 0; i < frame; ++i) {
      st += target[f * frame + i] * target[f * frame + i];
      si += interferer[f * frame + i] * interferer[f * frame + i];
    }
    pt[f] = st / static_cast<double>(frame);
    pi[f] = si / static_cast<double>(frame);
    peak = std::max(peak, pt[f]);
  }
  double sum_t = 0.0, sum_i = 0.0;
  int active = 0;
  for (std::size_t f = 0; f < count; ++f) {
    if (pt[f] >= peak * 1e-4) {
      sum_t += pt[f];
      sum_i += pi[f];
      ++active;
    }
  }
  REQUIRE(active > 0);
  return 10.0 * std::log10(sum_t / sum_i);
}

}  // namespace

TEST_CASE("builtin corpus utterances satisfy the contract") {
  BuiltinCorpus corpus(16000.0);
  CHECK(corpus.size() == 64);
  const std::vector<std::string> ids = corpus.ids();
  REQUIRE(ids.size() == corpus.size());
  for (const std::string& id : ids) {
    const Utterance& u = corpus.get(id);
    CHECK_NOTHROW(u.validate());
    CHECK(u.utterance_id == id);
    CHECK(u.sample_rate == 16000.0);
    CHECK(u.word_count() >= 4);
    const double db = rms_db(u.samples);
    CHECK(db <= -25.9);
    CHECK(db >= -30.0);
  }
  CHECK(corpus.get(ids[0]).transcript == "the cat sat on the warm mat");
  CHECK(corpus.get(ids[0]).word_count() == 7);
  CHECK_THROWS_AS(corpus.get("no-such-id"), NotFoundError);
}

TEST_CASE("utterance validation rejects malformed entries") {
  Utterance u;
  CHECK_THROWS_AS(u.validate(), MalformedInputError);
  u.utterance_id = "X";
  u.sample_rate = 16000.0;
  u.samples = {0.1, -0.1};
  CHECK_THROWS_AS(u.validate(), InvalidTranscriptError);
  u.transcript = "one two";
  CHECK_NOTHROW(u.validate());
  CHECK(u.word_count() == 2);
}

TEST_CASE("corpus synthesis is deterministic and rate-consistent") {
  BuiltinCorpus a(16000.0);
  BuiltinCorpus b(16000.0);
  for (const std::string& id : {std::string("U000"), std::string("U031")}) {
    CHECK(a.get(id).samples == b.get(id).samples);
  }
  BuiltinCorpus wide(44100.0);
  const double ratio = static_cast<double>(wide.get("U000").samples.size()) /
                       static_cast<double>(a.get("U000").samples.size());
  CHECK(ratio == doctest::Approx(44100.0 / 16000.0).epsilon(0.01));
  CHECK(wide.get("U000").transcript == a.get("U000").transcript);
}

TEST_CASE("builtin interferers are deterministic, sized, and distinct") {
  BuiltinInterferers gen(16000.0);
  for (InterfererType t : {InterfererType::television, InterfererType::appliance,
                           InterfererType::music, InterfererType::noise}) {
    const std::vector<double> x = gen.make(t, 5, 16000);
    REQUIRE(x.size() == 16000);
    CHECK(x == gen.make(t, 5, 16000));
    CHECK_FALSE(x == gen.make(t, 6, 16000));
    CHECK(dsp::rms(x) > 0.0);
    for (double v : x) CHECK(std::isfinite(v));
    const std::string name = interferer_type_name(t);
    CHECK(parse_interferer_type(name) == t);
  }
  CHECK_THROWS_AS(parse_interferer_type("vacuum"), ValidationError);
}

TEST_CASE("set_snr returns unit gain for equal-power signals") {
  Rng rng(3);
  std::vector<double> t(32000), i(32000);
  for (double& v : t) v = rng.normal();
  for (double& v : i) v = rng.normal();
  const double rt = dsp::rms(t), ri = dsp::rms(i);
  for (double& v : t) v /= rt;
  for (double& v : i) v /= ri;
  const double gain = set_snr(t, i, 0.0, 16000.0);
  CHECK(std::abs(20.0 * std::log10(gain)) < 0.1);
  // Identical signals give exactly unit gain.
  CHECK(set_snr(t, t, 0.0, 16000.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("set_snr gain survives an independent re-measurement at +6 dB") {
  BuiltinCorpus corpus(16000.0);
  const Utterance& u = corpus.get("U004");
  // Pad with leading and trailing silence so the active-frame gate matters.
  std::vector<double> target(8000, 0.0);
  target.insert(target.end(), u.samples.begin(), u.samples.end());
  target.insert(target.end(), 8000, 0.0);
  BuiltinInterferers gen(16000.0);
  std::vector<double> interferer = gen.make(InterfererType::noise, 17, target.size());

  const double gain = set_snr(target, interferer, 6.0, 16000.0);
  std::vector<double> scaled = interferer;
  for (double& v : scaled) v *= gain;
  const double measured = measure_snr_db(target, scaled, 16000.0);
  CHECK(measured >= 5.9);
  CHECK(measured <= 6.1);
}

TEST_CASE("set_snr error contract") {
  std::vector<double> silent(16000, 0.0);
  std::vector<double> noise(16000, 0.1);
  CHECK_THROWS_AS(set_snr(silent, noise, 0.0, 16000.0), SilentTargetError);
  CHECK_THROWS_AS(set_snr({}, {}, 0.0, 16000.0), SilentTargetError);
  CHECK_THROWS_AS(set_snr(noise, silent, 0.0, 16000.0), ValidationError);
  std::vector<double> shorter(8000, 0.1);
  CHECK_THROWS_AS(set_snr(noise, shorter, 0.0, 16000.0), InvalidArgumentError);
  CHECK_THROWS_AS(set_snr(noise, noise, 0.0, 0.0), InvalidArgumentError);
}

TEST_CASE("rendered mixture is linear in the interferer gain") {
  BuiltinCorpus corpus(16000.0);
  BuiltinInterferers gen(16000.0);
  RenderOptions opts;
  opts.apply_headroom = false;

  std::vector<SpinSignalSet> outs;
  for (double g : {0.0, 1.0, 2.0}) {
    SceneSpec spec = make_scene(corpus);
    InterfererSpec it = make_interferer();
    it.fixed_gain = g;
    spec.interferers = {it};
    outs.push_back(render_scene(spec, corpus, gen, opts));
    CHECK(spec.interferers[0].applied_gain == g);
  }
  REQUIRE(outs[0].mixture.size() == 6);
  double peak = 0.0;
  for (const auto& ch : outs[1].mixture)
    for (double v : ch) peak = std::max(peak, std::abs(v));
  for (std::size_t ch = 0; ch < 6; ++ch) {
    const auto& m0 = outs[0].mixture[ch];
    const auto& m1 = outs[1].mixture[ch];
    const auto& m2 = outs[2].mixture[ch];
    for (std::size_t i = 0; i < m0.size(); ++i) {
      const double d01 = m1[i] - m0[i];
      const double d12 = m2[i] - m1[i];
      CHECK(std::abs(d12 - d01) <= 1e-12 * std::max(1.0, peak));
    }
  }
}

TEST_CASE("a zero-gain interferer contributes nothing to the mixture") {
  BuiltinCorpus corpus(16000.0);
  BuiltinInterferers gen(16000.0);
  RenderOptions opts;
  opts.apply_headroom = false;

  // Two muted interferers with different content must render identically:
  // only the target survives, whatever the silenced source would have been.
  SceneSpec muted_noise = make_scene(corpus);
  InterfererSpec a = make_interferer();
  a.fixed_gain = 0.0;
  muted_noise.interferers = {a};
  const SpinSignalSet out_a = render_scene(muted_noise, corpus, gen, opts);

  SceneSpec muted_music = make_scene(corpus);
  InterfererSpec b = make_interferer();
  b.type = InterfererType::music;
  b.seed = 1234;
  b.position = {5.0, 1.5, 1.2};
  b.fixed_gain = 0.0;
  muted_music.interferers = {b};
  const SpinSignalSet out_b = render_scene(muted_music, corpus, gen, opts);

  REQUIRE(out_a.mixture.size() == out_b.mixture.size());
  for (std::size_t ch = 0; ch < out_a.mixture.size(); ++ch) {
    CHECK(out_a.mixture[ch] == out_b.mixture[ch]);
  }

  // Adding a muted second interferer to a live scene changes nothing either.
  SceneSpec live = make_scene(corpus);
  InterfererSpec active = make_interferer();
  active.fixed_gain = 0.7;
  live.interferers = {active};
  const SpinSignalSet base = render_scene(live, corpus, gen, opts);

  SceneSpec live_plus = make_scene(corpus);
  live_plus.interferers = {active, b};
  const SpinSignalSet padded = render_scene(live_plus, corpus, gen, opts);
  for (std::size_t ch = 0; ch < base.mixture.size(); ++ch) {
    CHECK(base.mixture[ch] == padded.mixture[ch]);
  }
}

TEST_CASE("channel labels and counts follow the head geometry") {
  BuiltinCorpus corpus(16000.0);
  BuiltinInterferers gen(16000.0);

  SceneSpec six = make_scene(corpus);
  six.interferers = {make_interferer()};
  const SpinSignalSet a = render_scene(six, corpus, gen);
  REQUIRE(a.labels.size() == 6);
  CHECK(a.labels[0].str() == "L0");
  CHECK(a.labels[2].str() == "L2");
  CHECK(a.labels[3].str() == "R0");
  CHECK(a.labels[5].str() == "R2");
  CHECK(a.channel_index({Ear::right, 1}) == 4);
  CHECK(a.channel_index({Ear::right, 3}) == -1);
  CHECK_THROWS_AS(a.channel({Ear::right, 3}), NotFoundError);
  CHECK(&a.channel({Ear::left, 0}) == &a.mixture[0]);

  SceneSpec four = make_scene(corpus);
  four.head = HeadGeometry::with_mics(2);
  four.interferers = {make_interferer()};
  const SpinSignalSet b = render_scene(four, corpus, gen);
  CHECK(b.labels.size() == 4);
  CHECK(b.mixture.size() == 4);
}

TEST_CASE("transcript rides along byte-for-byte") {
  BuiltinCorpus corpus(16000.0);
  BuiltinInterferers gen(16000.0);
  SceneSpec spec = make_scene(corpus);
  spec.interferers = {make_interferer()};
  const SpinSignalSet out = render_scene(spec, corpus, gen);
  CHECK(out.transcript == corpus.get(spec.target_utterance_id).transcript);

  SceneSpec pinned = make_scene(corpus);
  pinned.interferers = {make_interferer()};
  pinned.transcript = "overridden words";
  const SpinSignalSet out2 = render_scene(pinned, corpus, gen);
  CHECK(out2.transcript == "overridden words");
}

TEST_CASE("mixture level stays inside [-60, 0] dBFS and headroom is recorded") {
  BuiltinCorpus corpus(16000.0);
  BuiltinInterferers gen(16000.0);

  SceneSpec spec = make_scene(corpus);
  InterfererSpec loud = make_interferer();
  loud.fixed_gain = 40.0;  // forces the -3 dBFS peak cap
  spec.interferers = {loud};
  const SpinSignalSet out = render_scene(spec, corpus, gen);

  CHECK(out.normalisation_scale < 1.0);
  CHECK(spec.normalisation_scale == out.normalisation_scale);
  double peak = 0.0;
  for (const auto& ch : out.mixture) {
    const double db = rms_db(ch);
    CHECK(db >= -60.0);
    CHECK(db <= 0.0);
    for (double v : ch) peak = std::max(peak, std::abs(v));
  }
  CHECK(peak <= std::pow(10.0, -3.0 / 20.0) * (1.0 + 1e-12));
  CHECK(peak == doctest::Approx(std::pow(10.0, -3.0 / 20.0)).epsilon(1e-9));

  // A quiet scene is left alone.
  SceneSpec calm = make_scene(corpus);
  calm.interferers = {make_interferer()};
  const SpinSignalSet quiet = render_scene(calm, corpus, gen);
  CHECK(quiet.normalisation_scale == 1.0);
  for (const auto& ch : quiet.mixture) {
    CHECK(rms_db(ch) >= -60.0);
    CHECK(rms_db(ch) <= 0.0);
  }
}

TEST_CASE("rendering is bit-reproducible") {
  BuiltinCorpus corpus(16000.0);
  BuiltinInterferers gen(16000.0);

  SceneSpec first = make_scene(corpus);
  first.interferers = {make_interferer()};
  const SpinSignalSet a = render_scene(first, corpus, gen);

  SceneSpec second = make_scene(corpus);
  second.interferers = {make_interferer()};
  const SpinSignalSet b = render_scene(second, corpus, gen);

  CHECK(first.interferers[0].applied_gain == second.interferers[0].applied_gain);
  CHECK(a.reference == b.reference);
  for (std::size_t ch = 0; ch < a.mixture.size(); ++ch) {
    CHECK(a.mixture[ch] == b.mixture[ch]);
  }
}

TEST_CASE("reference carries the dry target on the padded timeline") {
  BuiltinCorpus corpus(16000.0);
  BuiltinInterferers gen(16000.0);
  SceneSpec spec = make_scene(corpus);
  spec.interferers = {make_interferer()};
  const SpinSignalSet out = render_scene(spec, corpus, gen);

  const Utterance& u = corpus.get(spec.target_utterance_id);
  const std::size_t pre = 16000, post = 16000;
  REQUIRE(out.reference.size() == pre + u.samples.size() + post);
  CHECK(out.frames() == out.reference.size());
  for (std::size_t i = 0; i < pre; ++i) CHECK(out.reference[i] == 0.0);
  for (std::size_t i = 0; i < u.samples.size(); ++i) {
    CHECK(out.reference[pre + i] == u.samples[i]);
  }
  // SNR calibration actually ran and recorded a positive gain.
  CHECK(spec.interferers[0].applied_gain > 0.0);
}
