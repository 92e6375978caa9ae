#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "spinsim/audiogram.hpp"
#include "spinsim/dataset.hpp"
#include "spinsim/enhancer.hpp"
#include "spinsim/intelligibility.hpp"
#include "spinsim/panel.hpp"
#include "spinsim/scoring.hpp"

namespace spinsim {

// One config drives the whole simulation; every stage seed is derived from
// the master seed, so a rerun reproduces all artefacts bit by bit.
struct PipelineConfig {
  std::uint64_t seed = 0x5eed;
  DatasetConfig dataset;         // dataset.seed is overridden from the master seed
  int listener_count = 10;
  PanelConfig panel;             // response_seed is overridden from the master seed
  ProcessorConfig enhancer;
  LogisticMap prediction;        // used directly when refit_on_dev is false
  bool refit_on_dev = true;      // fit the logistic on the dev split
  int jobs = 1;

  void validate() const;
};

nlohmann::json pipeline_config_to_json(const PipelineConfig& c);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct PipelineResult {
  std::filesystem::path out_dir;
  double baseline_mean_si = 0.0;
  double passthrough_mean_si = 0.0;
  double baseline_mean_si_impaired = 0.0;     // listeners with better-ear avg >= 35 dB HL
  double passthrough_mean_si_impaired = 0.0;
  double prediction_mse = 0.0;
  double constant_mean_mse = 0.0;             // constant predictor at the measured mean
  LogisticMap logistic_used;
  std::string logistic_source;                // "dev-fit", "config", or "fallback"
  Leaderboard enhancement_board;
  Leaderboard prediction_board;
};

// Runs the full round: dataset, listener panel, baseline entries (enhancement,
// pass-through, prediction), panel measurement, scoring, leaderboards.
// Artefacts land under out_dir; summary.json records the headline numbers.
PipelineResult run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir);

// Listener set serialisation shared by the CLI stages.
void write_listeners(const std::filesystem::path& path, const std::vector<Audiogram>& listeners);
std::vector<Audiogram> read_listeners(const std::filesystem::path& path);

}  // namespace spinsim
