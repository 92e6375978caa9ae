#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "spinsim/audiogram.hpp"
#include "spinsim/causality.hpp"
#include "spinsim/csv.hpp"
#include "spinsim/dataset.hpp"
#include "spinsim/enhancer.hpp"
#include "spinsim/entry.hpp"
#include "spinsim/panel.hpp"

namespace spinsim {

// Turns a declared processor command into a probe subject.
// "builtin:baseline" and "builtin:passthrough" run in-process; anything else
// is an external command template with {in}/{out} placeholders, executed in
// `workdir`. In-process probes fit the baseline to a flat moderate loss; the
// time structure under test does not depend on the gains.
Processor resolve_processor(const std::string& processor_cmd, const ProcessorConfig& config,
                            const std::filesystem::path& workdir);

// Probes the entry's declared processor against the lookahead rule. Throws
// DisqualifiedEntryError with the measured lookahead on failure and
// ValidationError when the entry declares no processor.
CausalityReport enforce_causality_rule(const Entry& entry, const ProcessorConfig& config,
                                       double sample_rate, int probe_channels,
                                       const std::filesystem::path& workdir,
                                       double max_lookahead_ms = kMaxLookaheadMs,
                                       const CausalityProbeOptions& options = {});

struct EnhancementScore {
  std::string entry_id;
  double mean_si = 0.0;    // unweighted mean over all (scene, listener) pairs
  csv::Table per_signal;   // scene_id, listener_id, words_total, words_correct, score
  CausalityReport causality;
};

// Full evaluation of an enhancement entry on the test split: causality gate,
// then the simulated panel listens to every enhanced signal.
EnhancementScore score_enhancement(const Entry& entry, const DatasetManifest& manifest,
                                   const std::filesystem::path& scene_dir,
                                   const std::vector<Audiogram>& listeners,
                                   const PanelConfig& panel_config,
                                   const ProcessorConfig& probe_config,
                                   const std::filesystem::path& probe_workdir);

struct PredictionScore {
  std::string entry_id;
  double mse = 0.0;
  csv::Table per_signal;  // scene_id, listener_id, predicted, measured, squared_error
};

// Mean squared error of a prediction entry against the measured panel table.
// Every panel row must be covered by a prediction.
PredictionScore score_prediction(const Entry& entry, const csv::Table& panel_table);

// Column statistics over a measured panel table (its `score` column).
double mean_of_scores(const csv::Table& panel_table);
double variance_of_scores(const csv::Table& panel_table);  // population variance, 1/N

struct LeaderboardRow {
  std::string entry_id;
  std::string team_id;
  double primary_score = 0.0;
  bool panel_eligible = false;
  std::string breakdown_path;  // per-signal CSV, when materialised
};

struct Leaderboard {
  EntryKind challenge = EntryKind::enhancement;
  std::vector<LeaderboardRow> rows;
};

// Sorts by primary score (descending mean SI for enhancement, ascending MSE
// for prediction), breaking ties by entry_id, and marks at most two entries
// per team as panel-eligible.
Leaderboard rank_and_cap(const std::vector<Entry>& entries,
                         const std::map<std::string, double>& scores, EntryKind challenge,
                         const std::map<std::string, std::string>& breakdown_paths = {});

csv::Table leaderboard_table(const Leaderboard& board);

}  // namespace spinsim
