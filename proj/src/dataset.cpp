#include "spinsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "spinsim/common.hpp"
#include "spinsim/rng.hpp"
#include "spinsim/thread_pool.hpp"
#include "spinsim/wav.hpp"

namespace spinsim {

namespace {

constexpr const char* kSplitNames[3] = {"train", "dev", "test"};
constexpr double kMinRt60 = 0.05;
constexpr double kMaxRt60 = 2.0;
constexpr int kPlacementBudget = 10000;

void check_range(const std::array<double, 2>& r, const char* what) {
  if (!(r[0] <= r[1])) {
    throw ValidationError(std::string(what) + " range must be ascending");
  }
}

}  // namespace

void DatasetConfig::validate() const {
  if (scene_count <= 0) throw ValidationError("scene count must be positive");
  double ratio_sum = 0.0;
  for (double r : split_ratios) {
    if (r < 0.0) throw ValidationError("split ratios must be non-negative");
    ratio_sum += r;
  }
  if (std::abs(ratio_sum - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1");
  if (sample_rate <= 0.0) throw ValidationError("sample rate must be positive");
  if (max_reflection_order < 0) throw ValidationError("reflection order must be non-negative");
  if (mics_per_ear != 2 && mics_per_ear != 3) throw ValidationError("mics per ear must be 2 or 3");
  check_range(rt60_range, "rt60");
  if (rt60_range[0] < kMinRt60 || rt60_range[1] > kMaxRt60) {
    throw ValidationError("rt60 range must lie within [0.05, 2.0] s");
  }
  check_range(room_x_range, "room x");
  check_range(room_y_range, "room y");
  check_range(room_z_range, "room z");
  if (room_x_range[0] <= 2.0 || room_y_range[0] <= 2.0) {
    throw ValidationError("room floor must exceed 2 m in x and y for the wall margins");
  }
  if (room_z_range[0] <= 2.2) {
    throw ValidationError("room height must exceed 2.2 m for the seated receiver");
  }
  check_range(snr_range_db, "snr");
  if (interferer_count_range[0] < 1 || interferer_count_range[1] < interferer_count_range[0]) {
    throw ValidationError("interferer count range must be ascending and at least 1");
  }
}

nlohmann::json dataset_config_to_json(const DatasetConfig& c) {
  return nlohmann::json{{"scene_count", c.scene_count},
                        {"split_ratios", c.split_ratios},
                        {"sample_rate", c.sample_rate},
                        {"max_reflection_order", c.max_reflection_order},
                        {"mics_per_ear", c.mics_per_ear},
                        {"rt60_range", c.rt60_range},
                        {"room_x_range", c.room_x_range},
                        {"room_y_range", c.room_y_range},
                        {"room_z_range", c.room_z_range},
                        {"snr_range_db", c.snr_range_db},
                        {"interferer_count_range", c.interferer_count_range},
                        {"seed", c.seed}};
}

DatasetConfig dataset_config_from_json(const nlohmann::json& j) {
  try {
    DatasetConfig c;
    c.scene_count = j.value("scene_count", c.scene_count);
    if (j.contains("split_ratios")) c.split_ratios = j.at("split_ratios").get<std::array<double, 3>>();
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    c.max_reflection_order = j.value("max_reflection_order", c.max_reflection_order);
    c.mics_per_ear = j.value("mics_per_ear", c.mics_per_ear);
    if (j.contains("rt60_range")) c.rt60_range = j.at("rt60_range").get<std::array<double, 2>>();
    if (j.contains("room_x_range")) c.room_x_range = j.at("room_x_range").get<std::array<double, 2>>();
    if (j.contains("room_y_range")) c.room_y_range = j.at("room_y_range").get<std::array<double, 2>>();
    if (j.contains("room_z_range")) c.room_z_range = j.at("room_z_range").get<std::array<double, 2>>();
    if (j.contains("snr_range_db")) c.snr_range_db = j.at("snr_range_db").get<std::array<double, 2>>();
    if (j.contains("interferer_count_range")) {
      c.interferer_count_range = j.at("interferer_count_range").get<std::array<int, 2>>();
    }
    c.seed = j.value("seed", c.seed);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed dataset config: ") + e.what());
  }
}

std::vector<const SceneSpec*> DatasetManifest::split(const std::string& name) const {
  std::vector<const SceneSpec*> out;
  for (const SceneSpec& s : scenes) {
    if (s.split == name) out.push_back(&s);
  }
  return out;
}

nlohmann::json manifest_to_json(const DatasetManifest& m) {
  nlohmann::json scenes = nlohmann::json::array();
  for (const SceneSpec& s : m.scenes) scenes.push_back(scene_to_json(s));
  return nlohmann::json{{"format", "spin-dataset-v1"},
                        {"config", dataset_config_to_json(m.config)},
                        {"scenes", std::move(scenes)}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string{}) != "spin-dataset-v1") {
      throw SchemaError("unknown manifest format");
    }
    DatasetManifest m;
    m.config = dataset_config_from_json(j.at("config"));
    for (const nlohmann::json& s : j.at("scenes")) m.scenes.push_back(scene_from_json(s));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed manifest: ") + e.what());
  }
}

namespace {

// Largest-remainder split of n by the ratios; counts sum to n.
std::array<int, 3> split_counts(int n, const std::array<double, 3>& ratios) {
  std::array<int, 3> counts{};
  std::array<double, 3> frac{};
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = ratios[i] * n;
    counts[i] = static_cast<int>(std::floor(exact));
    frac[i] = exact - counts[i];
    assigned += counts[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (frac[i] > frac[best]) best = i;
    }
    ++counts[best];
    frac[best] = -1.0;
    ++assigned;
  }
  return counts;
}

Vec3 place_interferer(const RoomSpec& room, const ScenePose& pose, Rng& rng) {
  const double z_lo = 1.0;
  const double z_hi = std::min(1.6, room.length_z - 1.0);
  for (int tries = 0; tries < kPlacementBudget; ++tries) {
    Vec3 p{rng.uniform(1.0, room.length_x - 1.0), rng.uniform(1.0, room.length_y - 1.0),
           z_hi > z_lo ? rng.uniform(z_lo, z_hi) : z_lo};
    if (distance(p, pose.receiver_position) < kMinClearance) continue;
    if (distance(p, pose.source_position) < 0.5) continue;
    return p;
  }
  throw SamplingFailureError("could not place an interferer away from the receiver");
}

}  // namespace

DatasetManifest plan_dataset(const DatasetConfig& config, const UtteranceSource& corpus) {
  config.validate();
  std::vector<std::string> utterance_ids = corpus.ids();
  if (static_cast<int>(utterance_ids.size()) < config.scene_count) {
    throw InsufficientCorpusError(
        "corpus has " + std::to_string(utterance_ids.size()) + " utterances but " +
        std::to_string(config.scene_count) + " scenes were requested");
  }

  // Deterministic shuffle; contiguous blocks of the shuffled list feed the
  // splits, so no utterance crosses a split boundary.
  {
    Rng shuffle_rng(derive_seed(config.seed, "utterance-shuffle"));
    for (std::size_t i = utterance_ids.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(
          shuffle_rng.uniform_int(0, static_cast<int>(i) - 1));
      std::swap(utterance_ids[i - 1], utterance_ids[j]);
    }
  }

  const std::array<int, 3> counts = split_counts(config.scene_count, config.split_ratios);

  DatasetManifest manifest;
  manifest.config = config;
  manifest.scenes.reserve(static_cast<std::size_t>(config.scene_count));
  int scene_index = 0;
  for (int split = 0; split < 3; ++split) {
    for (int k = 0; k < counts[split]; ++k, ++scene_index) {
      char idbuf[8];
      std::snprintf(idbuf, sizeof(idbuf), "S%04d", scene_index + 1);
      SceneSpec s;
      s.scene_id = idbuf;
      s.split = kSplitNames[split];
      s.seed = derive_seed(config.seed, std::string("scene:") + idbuf);
      Rng rng(s.seed);

      s.room.length_x = rng.uniform(config.room_x_range[0], config.room_x_range[1]);
      s.room.length_y = rng.uniform(config.room_y_range[0], config.room_y_range[1]);
      s.room.length_z = rng.uniform(config.room_z_range[0], config.room_z_range[1]);
      s.room.rt60_target = rng.uniform(config.rt60_range[0], config.rt60_range[1]);
      absorption_from_rt60(s.room);  // feasibility check under the Sabine bound
      s.absorption = eyring_absorption_from_rt60(s.room);

      s.head = HeadGeometry::with_mics(config.mics_per_ear);
      s.pose = sample_scene_geometry(s.room, derive_seed(s.seed, "pose"), s.head.ear_height);

      s.target_utterance_id = utterance_ids[static_cast<std::size_t>(scene_index)];
      s.transcript = corpus.get(s.target_utterance_id).transcript;

      const int n_interferers =
          rng.uniform_int(config.interferer_count_range[0], config.interferer_count_range[1]);
      for (int i = 0; i < n_interferers; ++i) {
        InterfererSpec it;
        const InterfererType types[] = {InterfererType::television, InterfererType::appliance,
                                        InterfererType::music, InterfererType::noise};
        it.type = types[rng.uniform_int(0, 3)];
        it.position = place_interferer(s.room, s.pose, rng);
        it.snr_db = rng.uniform(config.snr_range_db[0], config.snr_range_db[1]);
        it.seed = rng.next_u64();
        s.interferers.push_back(it);
      }

      s.sample_rate = config.sample_rate;
      s.max_reflection_order = config.max_reflection_order;
      s.validate();
      manifest.scenes.push_back(std::move(s));
    }
  }
  return manifest;
}

std::string mixture_wav_name(const std::string& scene_id, const ChannelLabel& label) {
  return scene_id + "_" + label.str() + ".wav";
}

std::string reference_wav_name(const std::string& scene_id) { return scene_id + "_ref.wav"; }

void render_dataset(DatasetManifest& manifest, const UtteranceSource& corpus,
                    const InterfererSource& interferers,
                    const std::filesystem::path& out_dir, int jobs) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());

  parallel_for(jobs, manifest.scenes.size(), [&](std::size_t i) {
    SceneSpec& spec = manifest.scenes[i];
    const SpinSignalSet signals = render_scene(spec, corpus, interferers);
    for (std::size_t ch = 0; ch < signals.labels.size(); ++ch) {
      wav::WavData w;
      w.sample_rate = signals.sample_rate;
      w.channels = {signals.mixture[ch]};
      wav::write(out_dir / mixture_wav_name(spec.scene_id, signals.labels[ch]), w);
    }
    wav::WavData ref;
    ref.sample_rate = signals.sample_rate;
    ref.channels = {signals.reference};
    wav::write(out_dir / reference_wav_name(spec.scene_id), ref);
  });

  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + out_dir.string());
  out << manifest_to_json(manifest).dump(2) << "\n";
}

SpinSignalSet load_scene_audio(const SceneSpec& spec, const std::filesystem::path& scene_dir) {
  SpinSignalSet out;
  out.scene_id = spec.scene_id;
  out.sample_rate = spec.sample_rate;
  out.transcript = spec.transcript;
  out.normalisation_scale = spec.normalisation_scale;
  for (Ear ear : {Ear::left, Ear::right}) {
    for (int m = 0; m < spec.head.mics_per_ear; ++m) {
      const ChannelLabel label{ear, m};
      const std::filesystem::path p = scene_dir / mixture_wav_name(spec.scene_id, label);
      wav::WavData w = wav::read(p);
      if (w.channels.size() != 1) throw MalformedInputError("expected mono WAV: " + p.string());
      out.labels.push_back(label);
      out.mixture.push_back(std::move(w.channels.front()));
    }
  }
  wav::WavData ref = wav::read(scene_dir / reference_wav_name(spec.scene_id));
  if (ref.channels.size() != 1) {
    throw MalformedInputError("expected mono reference WAV for scene " + spec.scene_id);
  }
  out.reference = std::move(ref.channels.front());
  return out;
}

DatasetManifest load_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest " + manifest_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("manifest is not valid JSON: ") + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace spinsim
