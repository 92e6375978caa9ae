#include "spinsim/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "spinsim/common.hpp"

namespace spinsim {

namespace {

Audiogram probe_audiogram() {
  Audiogram a;
  a.listener_id = "probe";
  a.left.fill(40.0);
  a.right.fill(40.0);
  return a;
}

// Reinterpret a probe WAV as a scene signal set: first half of the channels
// are the left mics, second half the right. Mono probes feed both ears.
SpinSignalSet probe_scene(const wav::WavData& in) {
  SpinSignalSet scene;
  scene.scene_id = "probe";
  scene.sample_rate = in.sample_rate;
  if (in.channels.empty()) throw MalformedInputError("probe has no channels");
  if (in.channels.size() == 1) {
    scene.labels = {{Ear::left, 0}, {Ear::right, 0}};
    scene.mixture = {in.channels[0], in.channels[0]};
    return scene;
  }
  if (in.channels.size() % 2 != 0) {
    throw MalformedInputError("probe channel count must be 1 or even");
  }
  const int per_ear = static_cast<int>(in.channels.size()) / 2;
  for (int m = 0; m < per_ear; ++m) {
    scene.labels.push_back({Ear::left, m});
    scene.mixture.push_back(in.channels[static_cast<std::size_t>(m)]);
  }
  for (int m = 0; m < per_ear; ++m) {
    scene.labels.push_back({Ear::right, m});
    scene.mixture.push_back(in.channels[static_cast<std::size_t>(per_ear + m)]);
  }
  return scene;
}

wav::WavData stereo_wav(const EnhancedOutput& out) {
  wav::WavData w;
  w.sample_rate = out.sample_rate;
  w.channels = {out.left, out.right};
  return w;
}

}  // namespace

Processor resolve_processor(const std::string& processor_cmd, const ProcessorConfig& config,
                            const std::filesystem::path& workdir) {
  if (processor_cmd == "builtin:baseline") {
    return [config](const wav::WavData& in) {
      return stereo_wav(enhance(probe_scene(in), config, probe_audiogram()));
    };
  }
  if (processor_cmd == "builtin:passthrough") {
    return [](const wav::WavData& in) {
      return stereo_wav(passthrough(probe_scene(in), probe_audiogram()));
    };
  }
  return command_processor(processor_cmd, workdir);
}

CausalityReport enforce_causality_rule(const Entry& entry, const ProcessorConfig& config,
                                       double sample_rate, int probe_channels,
                                       const std::filesystem::path& workdir,
                                       double max_lookahead_ms,
                                       const CausalityProbeOptions& options) {
  if (entry.metadata.processor_cmd.empty()) {
    throw ValidationError("entry " + entry.entry_id +
                          " declares no processor for the causality probe");
  }
  CausalityProbeOptions opts = options;
  opts.channels = probe_channels;
  const Processor processor = resolve_processor(entry.metadata.processor_cmd, config, workdir);
  const CausalityReport report =
      verify_causality(processor, sample_rate, max_lookahead_ms, opts);
  if (!report.passed) {
    throw DisqualifiedEntryError(
        "entry " + entry.entry_id + " disqualified: processor uses " +
        csv::format_double(report.measured_lookahead_ms) + " ms of lookahead (limit " +
        csv::format_double(report.limit_ms) + " ms)");
  }
  return report;
}

EnhancementScore score_enhancement(const Entry& entry, const DatasetManifest& manifest,
                                   const std::filesystem::path& scene_dir,
                                   const std::vector<Audiogram>& listeners,
                                   const PanelConfig& panel_config,
                                   const ProcessorConfig& probe_config,
                                   const std::filesystem::path& probe_workdir) {
  if (entry.kind != EntryKind::enhancement) {
    throw ValidationError("entry " + entry.entry_id + " is not an enhancement entry");
  }
  EnhancementScore result;
  result.entry_id = entry.entry_id;
  result.causality = enforce_causality_rule(entry, probe_config, manifest.config.sample_rate,
                                            2 * manifest.config.mics_per_ear, probe_workdir);

  std::vector<SpinSignalSet> scenes;
  for (const SceneSpec* spec : manifest.split("test")) {
    scenes.push_back(load_scene_audio(*spec, scene_dir));
  }
  result.per_signal = panel_measure(
      scenes, listeners,
      [&entry](const std::string& scene_id, const std::string& listener_id) {
        return load_enhanced(entry, scene_id, listener_id);
      },
      panel_config);
  result.mean_si = mean_of_scores(result.per_signal);
  return result;
}

PredictionScore score_prediction(const Entry& entry, const csv::Table& panel_table) {
  if (entry.kind != EntryKind::prediction) {
    throw ValidationError("entry " + entry.entry_id + " is not a prediction entry");
  }
  const auto predictions = load_predictions(entry);
  const int c_scene = panel_table.column("scene_id");
  const int c_listener = panel_table.column("listener_id");
  const int c_score = panel_table.column("si_measured");
  if (c_scene < 0 || c_listener < 0 || c_score < 0) {
    throw ValidationError("panel table must have columns scene_id, listener_id, si_measured");
  }
  if (panel_table.rows.empty()) throw IncompletePanelError("panel table is empty");

  PredictionScore result;
  result.entry_id = entry.entry_id;
  result.per_signal.header = {"scene_id", "listener_id", "predicted", "measured",
                              "squared_error"};
  double sum_sq = 0.0;
  for (const auto& row : panel_table.rows) {
    const std::string& scene_id = row[static_cast<std::size_t>(c_scene)];
    const std::string& listener_id = row[static_cast<std::size_t>(c_listener)];
    const auto it = predictions.find({scene_id, listener_id});
    if (it == predictions.end()) {
      throw IncompleteEntryError("entry " + entry.entry_id + " has no prediction for " +
                                 scene_id + "/" + listener_id);
    }
    const double measured = std::stod(row[static_cast<std::size_t>(c_score)]);
    const double err = it->second - measured;
    sum_sq += err * err;
    result.per_signal.rows.push_back({scene_id, listener_id, csv::format_double(it->second),
                                      csv::format_double(measured),
                                      csv::format_double(err * err)});
  }
  result.mse = sum_sq / static_cast<double>(panel_table.rows.size());
  return result;
}

namespace {

int score_column(const csv::Table& table) {
  const int c = table.column("si_measured");
  return c >= 0 ? c : table.column("score");
}

}  // namespace

double mean_of_scores(const csv::Table& panel_table) {
  const int c = score_column(panel_table);
  if (c < 0) throw ValidationError("table has no score column");
  if (panel_table.rows.empty()) throw ValidationError("table has no rows");
  double sum = 0.0;
  for (const auto& row : panel_table.rows) sum += std::stod(row[static_cast<std::size_t>(c)]);
  return sum / static_cast<double>(panel_table.rows.size());
}

double variance_of_scores(const csv::Table& panel_table) {
  const double mean = mean_of_scores(panel_table);
  const int c = score_column(panel_table);
  double sum_sq = 0.0;
  for (const auto& row : panel_table.rows) {
    const double d = std::stod(row[static_cast<std::size_t>(c)]) - mean;
    sum_sq += d * d;
  }
  return sum_sq / static_cast<double>(panel_table.rows.size());
}

Leaderboard rank_and_cap(const std::vector<Entry>& entries,
                         const std::map<std::string, double>& scores, EntryKind challenge,
                         const std::map<std::string, std::string>& breakdown_paths) {
  Leaderboard board;
  board.challenge = challenge;
  for (const Entry& e : entries) {
    if (e.kind != challenge) continue;
    const auto it = scores.find(e.entry_id);
    if (it == scores.end()) {
      throw ValidationError("entry " + e.entry_id + " has not been scored");
    }
    LeaderboardRow row;
    row.entry_id = e.entry_id;
    row.team_id = e.team_id;
    row.primary_score = it->second;
    const auto bp = breakdown_paths.find(e.entry_id);
    if (bp != breakdown_paths.end()) row.breakdown_path = bp->second;
    board.rows.push_back(std::move(row));
  }

  const bool descending = challenge == EntryKind::enhancement;
  std::sort(board.rows.begin(), board.rows.end(),
            [descending](const LeaderboardRow& a, const LeaderboardRow& b) {
              if (a.primary_score != b.primary_score) {
                return descending ? a.primary_score > b.primary_score
                                  : a.primary_score < b.primary_score;
              }
              return a.entry_id < b.entry_id;
            });

  std::map<std::string, int> per_team;
  for (LeaderboardRow& row : board.rows) {
    row.panel_eligible = per_team[row.team_id] < 2;
    if (row.panel_eligible) ++per_team[row.team_id];
  }
  return board;
}

csv::Table leaderboard_table(const Leaderboard& board) {
  csv::Table t;
  const char* score_name =
      board.challenge == EntryKind::enhancement ? "mean_si" : "mse";
  t.header = {"rank", "entry_id", "team_id", score_name, "panel_eligible", "breakdown"};
  for (std::size_t i = 0; i < board.rows.size(); ++i) {
    const LeaderboardRow& row = board.rows[i];
    t.rows.push_back({std::to_string(i + 1), row.entry_id, row.team_id,
                      csv::format_double(row.primary_score),
                      row.panel_eligible ? "true" : "false", row.breakdown_path});
  }
  return t;
}

}  // namespace spinsim
