#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "spinsim/corpus.hpp"
#include "spinsim/render.hpp"
#include "spinsim/scene_spec.hpp"

namespace spinsim {

struct DatasetConfig {
  int scene_count = 20;
  std::array<double, 3> split_ratios = {0.5, 0.2, 0.3};  // train, dev, test
  double sample_rate = 44100.0;
  int max_reflection_order = 30;
  int mics_per_ear = 3;
  std::array<double, 2> rt60_range = {0.2, 0.5};
  std::array<double, 2> room_x_range = {5.0, 8.0};
  std::array<double, 2> room_y_range = {4.0, 6.0};
  std::array<double, 2> room_z_range = {2.4, 3.0};
  std::array<double, 2> snr_range_db = {0.0, 12.0};
  std::array<int, 2> interferer_count_range = {1, 3};
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json dataset_config_to_json(const DatasetConfig& c);
DatasetConfig dataset_config_from_json(const nlohmann::json& j);

struct DatasetManifest {
  DatasetConfig config;
  std::vector<SceneSpec> scenes;  // ordered by scene id

  std::vector<const SceneSpec*> split(const std::string& name) const;
};

nlohmann::json manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);

// Draw every scene: rooms, poses, interferer layouts, target utterances.
// Splits use disjoint utterance pools. No audio is rendered yet.
DatasetManifest plan_dataset(const DatasetConfig& config, const UtteranceSource& corpus);

// File names of one rendered scene, relative to the scene directory.
std::string mixture_wav_name(const std::string& scene_id, const ChannelLabel& label);
std::string reference_wav_name(const std::string& scene_id);

// Render every scene in the manifest to `out_dir` (one WAV per microphone
// plus the reference), filling in the applied gains and normalisation
// scales. Writes manifest.json alongside the audio.
void render_dataset(DatasetManifest& manifest, const UtteranceSource& corpus,
                    const InterfererSource& interferers,
                    const std::filesystem::path& out_dir, int jobs = 1);

// Load a rendered scene back from disk.
SpinSignalSet load_scene_audio(const SceneSpec& spec, const std::filesystem::path& scene_dir);

DatasetManifest load_manifest(const std::filesystem::path& manifest_path);

}  // namespace spinsim
