#include "spinsim/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "spinsim/common.hpp"
#include "spinsim/dsp.hpp"
#include "spinsim/rng.hpp"

namespace spinsim {

using namespace dsp;

void Utterance::validate() const {
  if (utterance_id.empty()) throw MalformedInputError("utterance id is empty");
  if (sample_rate <= 0.0) throw MalformedInputError("utterance sample rate must be positive");
  if (samples.empty()) throw MalformedInputError("utterance '" + utterance_id + "' has no samples");
  if (transcript.empty()) throw InvalidTranscriptError("utterance '" + utterance_id + "' has no transcript");
}

int Utterance::word_count() const {
  std::istringstream ss(transcript);
  std::string w;
  int n = 0;
  while (ss >> w) ++n;
  return n;
}

namespace {

const char* const kSentences[] = {
    "the cat sat on the warm mat",
    "she poured milk into the blue cup",
    "a dog barked at the open gate",
    "the boy kicked the ball over the fence",
    "rain fell softly on the tin roof",
    "he put the keys on the low shelf",
    "the old clock ticked in the hall",
    "birds sang early in the tall trees",
    "she wrote a note on green paper",
    "the bus stopped near the corner shop",
    "a red kite flew above the park",
    "he washed the plates after dinner",
    "the lamp glowed in the dark room",
    "two ducks swam across the still pond",
    "the baker sliced the fresh warm bread",
    "wind pushed the leaves along the path",
    "she folded the towels on the bed",
    "a train rolled past the small farm",
    "the girl drew a house with four windows",
    "he filled the kettle at the sink",
    "snow covered the steps by the door",
    "the farmer fed the hens at dawn",
    "a spider spun a web in the shed",
    "she picked ripe plums from the tree",
    "the driver waited at the red light",
    "waves broke gently on the long beach",
    "he tied the boat to the wooden post",
    "the nurse opened the window for air",
    "a fox crossed the road at night",
    "the twins shared a bag of sweets",
    "she planted seeds in the soft soil",
    "the teacher read a story out loud",
    "a bell rang twice in the tower",
    "he swept the floor of the barn",
    "the soup simmered on the back burner",
    "a moth circled the bright porch light",
    "she hung the coat behind the door",
    "the river ran fast after the storm",
    "he counted coins into the jar",
    "the child built a fort from cushions",
    "a horse grazed in the wide field",
    "she stirred honey into the hot tea",
    "the postman left a parcel on the step",
    "frost formed on the glass overnight",
    "he sharpened the pencil to a point",
    "the crowd cheered when the team scored",
    "a candle flickered on the window sill",
    "she swept sand from the kitchen tiles",
    "the engine hummed as the car idled",
    "he stacked the logs beside the wall",
    "the kettle whistled and she turned it off",
    "a gull landed on the harbour rail",
    "the map showed a path through the hills",
    "she zipped the bag and left the house",
    "the dog dug a hole under the hedge",
    "he painted the fence a pale grey",
    "the market sold fruit from local farms",
    "a plane drew a white line in the sky",
    "she laced her boots before the walk",
    "the cook added salt to the stew",
    "thunder rolled far beyond the ridge",
    "he patched the tyre with care",
    "the library closed at six each day",
    "a squirrel buried nuts near the oak",
};

constexpr int kSentenceCount = static_cast<int>(sizeof(kSentences) / sizeof(kSentences[0]));

struct Formants {
  double f1, f2, f3;
};

// A small vowel inventory; values are typical adult formant frequencies.
const Formants kVowels[] = {
    {800.0, 1150.0, 2900.0},  // open back
    {500.0, 1900.0, 2500.0},  // mid front
    {300.0, 2300.0, 3000.0},  // close front
    {450.0, 800.0, 2830.0},   // mid back rounded
    {325.0, 700.0, 2530.0},   // close back rounded
    {660.0, 1700.0, 2400.0},  // near-open front
};

constexpr int kVowelCount = static_cast<int>(sizeof(kVowels) / sizeof(kVowels[0]));

// Second-order all-pole resonator applied in place.
void resonate(std::vector<double>& x, double f0, double bw, double fs) {
  const double r = std::exp(-kPi * bw / fs);
  const double w = 2.0 * kPi * f0 / fs;
  const double a1 = 2.0 * r * std::cos(w);
  const double a2 = -r * r;
  const double g = (1.0 - r) * std::sqrt(1.0 - 2.0 * r * std::cos(2.0 * w) + r * r);
  double y1 = 0.0, y2 = 0.0;
  for (double& v : x) {
    const double y = g * v + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

std::vector<double> synth_syllable(double fs, double f0_start, double f0_end,
                                   const Formants& fm, double dur_s, bool noise_onset,
                                   Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(std::lround(dur_s * fs));
  std::vector<double> x(n, 0.0);

  // Glottal source: impulse train with a linear pitch glide.
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    const double f0 = f0_start + (f0_end - f0_start) * t;
    phase += f0 / fs;
    if (phase >= 1.0) {
      phase -= 1.0;
      x[i] = 1.0;
    }
  }

  resonate(x, fm.f1, 80.0, fs);
  resonate(x, fm.f2, 100.0, fs);
  resonate(x, fm.f3, 140.0, fs);

  // Optional fricative-like onset.
  if (noise_onset) {
    const std::size_t burst = std::min<std::size_t>(n, static_cast<std::size_t>(0.04 * fs));
    double prev = 0.0;
    for (std::size_t i = 0; i < burst; ++i) {
      const double w = rng.normal();
      x[i] += 0.25 * (w - prev);  // first difference emphasises high frequencies
      prev = w;
    }
  }

  // Raised-cosine attack and decay.
  const std::size_t ramp = std::min<std::size_t>(n / 4, static_cast<std::size_t>(0.03 * fs));
  for (std::size_t i = 0; i < ramp && i < n; ++i) {
    const double g = 0.5 - 0.5 * std::cos(kPi * static_cast<double>(i) / static_cast<double>(ramp));
    x[i] *= g;
    x[n - 1 - i] *= g;
  }

  const double r = rms(x);
  if (r > 0.0) {
    const double target = 0.05;
    for (double& v : x) v *= target / r;
  }
  return x;
}

std::vector<double> synth_sentence(const std::string& text, double fs, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> words;
  {
    std::istringstream ss(text);
    std::string w;
    while (ss >> w) words.push_back(w);
  }

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(0.4 * fs) * words.size());

  const double f0_base = 110.0 + 40.0 * rng.uniform();
  const std::size_t total_words = words.size();
  for (std::size_t wi = 0; wi < total_words; ++wi) {
    const std::string& word = words[wi];
    // Word identity fixes its phonetic content; position drives prosody.
    Rng wrng(derive_seed(seed, word + "#" + std::to_string(wi)));
    const int syllables = 1 + static_cast<int>(word.size() > 4) + static_cast<int>(word.size() > 7);
    const double decl = 1.0 - 0.15 * static_cast<double>(wi) / static_cast<double>(total_words);
    for (int s = 0; s < syllables; ++s) {
      const Formants& fm = kVowels[wrng.uniform_int(0, kVowelCount - 1)];
      const double dur = 0.14 + 0.10 * wrng.uniform();
      const double f0a = f0_base * decl * (1.0 + 0.08 * wrng.uniform());
      const double f0b = f0a * (0.92 + 0.06 * wrng.uniform());
      const bool onset = wrng.uniform() < 0.45;
      std::vector<double> syl = synth_syllable(fs, f0a, f0b, fm, dur, onset, wrng);
      out.insert(out.end(), syl.begin(), syl.end());
    }
    const std::size_t gap = static_cast<std::size_t>((0.06 + 0.06 * rng.uniform()) * fs);
    out.insert(out.end(), gap, 0.0);
  }

  // Present at a speech-like level: -26 dBFS RMS with a peak guard.
  const double r = rms(out);
  if (r > 0.0) {
    double g = db_to_amp(-26.0) / r;
    double peak = 0.0;
    for (double v : out) peak = std::max(peak, std::abs(v));
    const double cap = db_to_amp(-3.0);
    if (peak * g > cap) g = cap / peak;
    for (double& v : out) v *= g;
  }
  return out;
}

std::string utterance_id_for(int index) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "U%03d", index);
  return buf;
}

}  // namespace

BuiltinCorpus::BuiltinCorpus(double sample_rate) {
  if (sample_rate <= 0.0) throw InvalidArgumentError("corpus sample rate must be positive");
  utterances_.reserve(kSentenceCount);
  for (int i = 0; i < kSentenceCount; ++i) {
    Utterance u;
    u.utterance_id = utterance_id_for(i);
    u.transcript = kSentences[i];
    u.sample_rate = sample_rate;
    u.samples = synth_sentence(u.transcript, sample_rate, derive_seed(0x5eedc0de5u, u.utterance_id));
    utterances_.push_back(std::move(u));
  }
}

const Utterance& BuiltinCorpus::get(const std::string& utterance_id) const {
  for (const Utterance& u : utterances_) {
    if (u.utterance_id == utterance_id) return u;
  }
  throw NotFoundError("unknown utterance id '" + utterance_id + "'");
}

std::vector<std::string> BuiltinCorpus::ids() const {
  std::vector<std::string> out;
  out.reserve(utterances_.size());
  for (const Utterance& u : utterances_) out.push_back(u.utterance_id);
  return out;
}

const char* interferer_type_name(InterfererType t) {
  switch (t) {
    case InterfererType::television: return "television";
    case InterfererType::appliance: return "appliance";
    case InterfererType::music: return "music";
    case InterfererType::noise: return "noise";
  }
  throw InvalidArgumentError("bad interferer type");
}

InterfererType parse_interferer_type(const std::string& name) {
  if (name == "television") return InterfererType::television;
  if (name == "appliance") return InterfererType::appliance;
  if (name == "music") return InterfererType::music;
  if (name == "noise") return InterfererType::noise;
  throw InvalidArgumentError("unknown interferer type '" + name + "'");
}

namespace {

void normalise_rms(std::vector<double>& x, double target_db) {
  const double r = rms(x);
  if (r <= 0.0) return;
  const double g = db_to_amp(target_db) / r;
  for (double& v : x) v *= g;
}

std::vector<double> shaped_noise(double fs, std::uint64_t seed, std::size_t length,
                                 double slope_per_octave_db) {
  Rng rng(seed);
  const std::size_t nfft = next_pow2(std::max<std::size_t>(length, 2));
  std::vector<double> white(nfft);
  for (double& v : white) v = rng.normal();
  std::vector<std::complex<double>> spec = rfft(white, nfft);
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(nfft);
    const double octaves = std::log2(f / 500.0);
    spec[k] *= db_to_amp(slope_per_octave_db * octaves);
  }
  spec[0] = 0.0;
  std::vector<double> x = irfft(spec, nfft);
  x.resize(length);
  return x;
}

std::vector<double> make_music(double fs, std::uint64_t seed, std::size_t length) {
  Rng rng(seed);
  std::vector<double> x(length, 0.0);
  const double beat_s = 0.5;
  const std::size_t beat_n = static_cast<std::size_t>(beat_s * fs);
  const int root = rng.uniform_int(45, 57);  // MIDI note of the tonic
  const int progression[4] = {0, 5, 7, 0};   // I IV V I in semitones
  std::size_t pos = 0;
  int beat = 0;
  while (pos < length) {
    const int degree = progression[beat % 4];
    const int chord[3] = {root + degree, root + degree + 4, root + degree + 7};
    const std::size_t n = std::min(beat_n, length - pos);
    const double strum = 0.8 + 0.4 * rng.uniform();
    for (int note : chord) {
      const double f = 440.0 * std::pow(2.0, (note - 69) / 12.0);
      const double phase0 = 2.0 * kPi * rng.uniform();
      for (int h = 1; h <= 4; ++h) {
        const double amp = strum / (h * h);
        const double w = 2.0 * kPi * f * h / fs;
        for (std::size_t i = 0; i < n; ++i) {
          const double env = std::exp(-3.0 * static_cast<double>(i) / static_cast<double>(beat_n));
          x[pos + i] += amp * env * std::sin(w * static_cast<double>(i) + phase0 * h);
        }
      }
    }
    pos += n;
    ++beat;
  }
  return x;
}

std::vector<double> make_appliance(double fs, std::uint64_t seed, std::size_t length) {
  Rng rng(seed);
  std::vector<double> x(length, 0.0);
  const int harmonics[] = {1, 2, 3, 4, 6, 8};
  const double mains = 50.0;
  for (int h : harmonics) {
    const double amp = 1.0 / h;
    const double w = 2.0 * kPi * mains * h / fs;
    const double phase0 = 2.0 * kPi * rng.uniform();
    for (std::size_t i = 0; i < length; ++i) {
      x[i] += amp * std::sin(w * static_cast<double>(i) + phase0);
    }
  }
  // Slow mechanical wobble plus broadband motor hiss.
  const double wob_w = 2.0 * kPi * 0.3 / fs;
  for (std::size_t i = 0; i < length; ++i) {
    x[i] *= 1.0 + 0.2 * std::sin(wob_w * static_cast<double>(i));
  }
  std::vector<double> hiss = shaped_noise(fs, derive_seed(seed, "hiss"), length, -6.0);
  normalise_rms(hiss, -26.0 - 20.0);
  normalise_rms(x, -26.0);
  for (std::size_t i = 0; i < length; ++i) x[i] += hiss[i];
  return x;
}

std::vector<double> make_television(double fs, std::uint64_t seed, std::size_t length) {
  // A speech-band noise with syllabic modulation layered over faint music.
  std::vector<double> voice = shaped_noise(fs, derive_seed(seed, "tv-voice"), length, -4.0);
  Rng rng(derive_seed(seed, "tv-mod"));
  const double mod_f = 3.5 + rng.uniform();
  const double w = 2.0 * kPi * mod_f / fs;
  const double phase0 = 2.0 * kPi * rng.uniform();
  for (std::size_t i = 0; i < length; ++i) {
    voice[i] *= 1.0 + 0.7 * std::sin(w * static_cast<double>(i) + phase0);
  }
  std::vector<double> music = make_music(fs, derive_seed(seed, "tv-music"), length);
  normalise_rms(voice, -26.0);
  normalise_rms(music, -26.0 - 12.0);
  for (std::size_t i = 0; i < length; ++i) voice[i] += music[i];
  return voice;
}

}  // namespace

BuiltinInterferers::BuiltinInterferers(double sample_rate) : sample_rate_(sample_rate) {
  if (sample_rate <= 0.0) throw InvalidArgumentError("interferer sample rate must be positive");
}

std::vector<double> BuiltinInterferers::make(InterfererType type, std::uint64_t seed,
                                             std::size_t length) const {
  if (length == 0) return {};
  std::vector<double> x;
  switch (type) {
    case InterfererType::noise:
      x = shaped_noise(sample_rate_, seed, length, -3.0);
      break;
    case InterfererType::music:
      x = make_music(sample_rate_, seed, length);
      break;
    case InterfererType::appliance:
      x = make_appliance(sample_rate_, seed, length);
      break;
    case InterfererType::television:
      x = make_television(sample_rate_, seed, length);
      break;
  }
  normalise_rms(x, -26.0);
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  const double cap = db_to_amp(-3.0);
  if (peak > cap) {
    const double g = cap / peak;
    for (double& v : x) v *= g;
  }
  return x;
}

}  // namespace spinsim
