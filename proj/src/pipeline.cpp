#include "spinsim/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <utility>

#include "spinsim/common.hpp"
#include "spinsim/corpus.hpp"
#include "spinsim/csv.hpp"
#include "spinsim/rng.hpp"
#include "spinsim/thread_pool.hpp"
#include "spinsim/wav.hpp"

namespace spinsim {

void PipelineConfig::validate() const {
  dataset.validate();
  panel.validate();
  enhancer.validate();
  prediction.validate();
  if (listener_count <= 0) throw ValidationError("listener count must be positive");
  if (jobs < 1) throw ValidationError("jobs must be at least 1");
}

nlohmann::json pipeline_config_to_json(const PipelineConfig& c) {
  return nlohmann::json{{"seed", c.seed},
                        {"dataset", dataset_config_to_json(c.dataset)},
                        {"listener_count", c.listener_count},
                        {"panel_kappa", c.panel.word_noise_kappa},
                        {"enhancer", processor_config_to_json(c.enhancer)},
                        {"prediction", logistic_to_json(c.prediction)},
                        {"refit_on_dev", c.refit_on_dev},
                        {"jobs", c.jobs}};
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  try {
    PipelineConfig c;
    c.seed = j.value("seed", c.seed);
    if (j.contains("dataset")) c.dataset = dataset_config_from_json(j.at("dataset"));
    c.listener_count = j.value("listener_count", c.listener_count);
    c.panel.word_noise_kappa = j.value("panel_kappa", c.panel.word_noise_kappa);
    if (j.contains("enhancer")) c.enhancer = processor_config_from_json(j.at("enhancer"));
    if (j.contains("prediction")) c.prediction = logistic_from_json(j.at("prediction"));
    c.refit_on_dev = j.value("refit_on_dev", c.refit_on_dev);
    c.jobs = j.value("jobs", c.jobs);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed pipeline config: ") + e.what());
  }
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
  return pipeline_config_from_json(j);
}

void write_listeners(const std::filesystem::path& path,
                     const std::vector<Audiogram>& listeners) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Audiogram& a : listeners) arr.push_back(audiogram_to_json(a));
  std::ofstream out(path);
  if (!out) throw IoError("cannot write listeners file " + path.string());
  out << nlohmann::json{{"format", "spin-listeners-v1"}, {"listeners", std::move(arr)}}.dump(2)
      << "\n";
}

std::vector<Audiogram> read_listeners(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open listeners file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    std::vector<Audiogram> out;
    for (const nlohmann::json& a : j.at("listeners")) out.push_back(audiogram_from_json(a));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed listeners file: ") + e.what());
  }
}

namespace {

template <typename Fn>
auto run_stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "stage " + name + ": " + e.what());
  }
}

struct PairKey {
  const SceneSpec* scene;
  const Audiogram* listener;
};

std::vector<PairKey> cross(const std::vector<const SceneSpec*>& scenes,
                           const std::vector<Audiogram>& listeners) {
  std::vector<PairKey> out;
  out.reserve(scenes.size() * listeners.size());
  for (const SceneSpec* s : scenes) {
    for (const Audiogram& a : listeners) out.push_back({s, &a});
  }
  return out;
}

// Renders baseline (or pass-through) outputs for every pair into dir.
void enhance_split(const DatasetManifest& manifest, const std::string& split,
                   const std::filesystem::path& scene_dir,
                   const std::vector<Audiogram>& listeners, const ProcessorConfig& config,
                   bool use_baseline, const std::filesystem::path& dir, int jobs) {
  std::filesystem::create_directories(dir);
  const std::vector<const SceneSpec*> scenes = manifest.split(split);
  const std::vector<PairKey> pairs = cross(scenes, listeners);
  // One scene's audio feeds listener_count enhancements; cache per scene id.
  std::map<std::string, SpinSignalSet> audio;
  std::mutex audio_mutex;
  parallel_for(jobs, pairs.size(), [&](std::size_t i) {
    const PairKey& pair = pairs[i];
    const SpinSignalSet* scene = nullptr;
    {
      std::lock_guard<std::mutex> lock(audio_mutex);
      auto it = audio.find(pair.scene->scene_id);
      if (it == audio.end()) {
        it = audio.emplace(pair.scene->scene_id, load_scene_audio(*pair.scene, scene_dir))
                 .first;
      }
      scene = &it->second;
    }
    const EnhancedOutput out = use_baseline ? enhance(*scene, config, *pair.listener)
                                            : passthrough(*scene, *pair.listener);
    wav::WavData w;
    w.sample_rate = out.sample_rate;
    w.channels = {out.left, out.right};
    wav::write(dir / enhanced_wav_name(pair.scene->scene_id, pair.listener->listener_id), w);
  });
}

Entry make_entry(const std::string& entry_id, const std::string& team_id, EntryKind kind,
                 const std::filesystem::path& payload, const std::string& processor_cmd) {
  Entry e;
  e.entry_id = entry_id;
  e.team_id = team_id;
  e.kind = kind;
  e.payload_path = payload;
  e.metadata.processor_cmd = processor_cmd;
  return e;
}

void write_entry_manifest(const std::filesystem::path& dir, const Entry& e) {
  Entry rel = e;
  rel.payload_path = std::filesystem::relative(e.payload_path, dir);
  std::ofstream out(dir / "entry.json");
  if (!out) throw IoError("cannot write entry manifest in " + dir.string());
  out << entry_to_json(rel).dump(2) << "\n";
}

double mean_over_listeners(const csv::Table& table, const std::vector<std::string>& ids) {
  const int c_listener = table.column("listener_id");
  const int c_score = table.column("si_measured");
  double sum = 0.0;
  int n = 0;
  for (const auto& row : table.rows) {
    const std::string& id = row[static_cast<std::size_t>(c_listener)];
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) continue;
    sum += std::stod(row[static_cast<std::size_t>(c_score)]);
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config,
                            const std::filesystem::path& out_dir) {
  run_stage("config", [&] { config.validate(); });

  PipelineResult result;
  result.out_dir = out_dir;
  std::filesystem::create_directories(out_dir);

  const BuiltinCorpus corpus(config.dataset.sample_rate);
  const BuiltinInterferers interferers(config.dataset.sample_rate);

  const std::filesystem::path scene_dir = out_dir / "scenes";
  DatasetManifest manifest = run_stage("scenes", [&] {
    DatasetConfig dc = config.dataset;
    dc.seed = derive_seed(config.seed, "dataset");
    DatasetManifest m = plan_dataset(dc, corpus);
    render_dataset(m, corpus, interferers, scene_dir, config.jobs);
    return m;
  });

  const std::vector<Audiogram> listeners = run_stage("listeners", [&] {
    std::vector<Audiogram> l =
        generate_panel(config.listener_count, derive_seed(config.seed, "listeners"));
    write_listeners(out_dir / "listeners.json", l);
    return l;
  });

  const std::filesystem::path baseline_payload = out_dir / "entries" / "baseline_enh" / "payload";
  const std::filesystem::path passthrough_payload =
      out_dir / "entries" / "passthrough_enh" / "payload";
  const std::filesystem::path dev_dir = out_dir / "enh_dev";
  run_stage("enhance", [&] {
    enhance_split(manifest, "test", scene_dir, listeners, config.enhancer, true,
                  baseline_payload, config.jobs);
    enhance_split(manifest, "test", scene_dir, listeners, config.enhancer, false,
                  passthrough_payload, config.jobs);
    if (config.refit_on_dev) {
      enhance_split(manifest, "dev", scene_dir, listeners, config.enhancer, true, dev_dir,
                    config.jobs);
    }
  });

  LogisticMap logistic = config.prediction;
  result.logistic_source = "config";
  if (config.refit_on_dev) {
    run_stage("fit", [&] {
      const std::vector<const SceneSpec*> dev = manifest.split("dev");
      std::vector<SpinSignalSet> dev_audio;
      for (const SceneSpec* s : dev) dev_audio.push_back(load_scene_audio(*s, scene_dir));
      PanelConfig dev_panel = config.panel;
      dev_panel.response_seed = derive_seed(config.seed, "panel-dev");
      const csv::Table measured = panel_measure(
          dev_audio, listeners,
          [&](const std::string& scene_id, const std::string& listener_id) {
            const std::filesystem::path p = dev_dir / enhanced_wav_name(scene_id, listener_id);
            wav::WavData w = wav::read(p);
            EnhancedOutput out;
            out.scene_id = scene_id;
            out.listener_id = listener_id;
            out.sample_rate = w.sample_rate;
            out.left = std::move(w.channels.at(0));
            out.right = std::move(w.channels.at(1));
            return out;
          },
          dev_panel);
      const int c_scene = measured.column("scene_id");
      const int c_listener = measured.column("listener_id");
      const int c_score = measured.column("si_measured");
      std::vector<std::pair<double, double>> pairs;
      std::map<std::string, const SpinSignalSet*> by_id;
      for (const SpinSignalSet& s : dev_audio) by_id[s.scene_id] = &s;
      std::map<std::string, const Audiogram*> listener_by_id;
      for (const Audiogram& a : listeners) listener_by_id[a.listener_id] = &a;
      for (const auto& row : measured.rows) {
        const SpinSignalSet& scene = *by_id.at(row[static_cast<std::size_t>(c_scene)]);
        const Audiogram& listener =
            *listener_by_id.at(row[static_cast<std::size_t>(c_listener)]);
        const std::filesystem::path p =
            dev_dir / enhanced_wav_name(scene.scene_id, listener.listener_id);
        wav::WavData w = wav::read(p);
        EnhancedOutput out;
        out.scene_id = scene.scene_id;
        out.listener_id = listener.listener_id;
        out.sample_rate = w.sample_rate;
        out.left = std::move(w.channels.at(0));
        out.right = std::move(w.channels.at(1));
        const IntelligibilityScore s =
            predict_intelligibility(scene, out, listener, logistic);
        pairs.emplace_back(s.metric, std::stod(row[static_cast<std::size_t>(c_score)]));
      }
      try {
        logistic = fit_logistic(pairs);
        result.logistic_source = "dev-fit";
      } catch (const FitFailureError&) {
        logistic = config.prediction;
        result.logistic_source = "fallback";
      }
    });
  }
  result.logistic_used = logistic;

  const std::filesystem::path pred_payload =
      out_dir / "entries" / "baseline_pred" / "predictions.csv";
  run_stage("predict", [&] {
    std::filesystem::create_directories(pred_payload.parent_path());
    const Entry source =
        make_entry("payload-reader", "-", EntryKind::enhancement, baseline_payload, "");
    csv::Table t;
    t.header = {"scene_id", "listener_id", "score"};
    for (const SceneSpec* spec : manifest.split("test")) {
      const SpinSignalSet scene = load_scene_audio(*spec, scene_dir);
      for (const Audiogram& listener : listeners) {
        const EnhancedOutput out = load_enhanced(source, spec->scene_id, listener.listener_id);
        const IntelligibilityScore s = predict_intelligibility(scene, out, listener, logistic);
        t.rows.push_back(
            {spec->scene_id, listener.listener_id, csv::format_double(s.score)});
      }
    }
    csv::write(pred_payload, t);
  });

  EntryStore store;
  run_stage("ingest", [&] {
    CoverageSpec coverage;
    for (const SceneSpec* s : manifest.split("test")) coverage.scene_ids.push_back(s->scene_id);
    for (const Audiogram& a : listeners) coverage.listener_ids.push_back(a.listener_id);
    coverage.sample_rate = manifest.config.sample_rate;

    const Entry baseline = make_entry("baseline_enh", "baseline", EntryKind::enhancement,
                                      baseline_payload, "builtin:baseline");
    const Entry pass = make_entry("passthrough_enh", "baseline", EntryKind::enhancement,
                                  passthrough_payload, "builtin:passthrough");
    const Entry pred = make_entry("baseline_pred", "baseline", EntryKind::prediction,
                                  pred_payload, "");
    write_entry_manifest(out_dir / "entries" / "baseline_enh", baseline);
    write_entry_manifest(out_dir / "entries" / "passthrough_enh", pass);
    write_entry_manifest(out_dir / "entries" / "baseline_pred", pred);
    store.add(ingest_entry(baseline, coverage));
    store.add(ingest_entry(pass, coverage));
    store.add(ingest_entry(pred, coverage));
  });

  PanelConfig panel = config.panel;
  panel.response_seed = derive_seed(config.seed, "panel");

  const std::filesystem::path panel_dir = out_dir / "panel";
  std::filesystem::create_directories(panel_dir);
  std::map<std::string, double> enh_scores;
  std::map<std::string, std::string> breakdowns;
  csv::Table baseline_panel_table;

  std::vector<std::string> impaired_ids;
  for (const Audiogram& a : listeners) {
    if (a.better_ear_average() >= 35.0) impaired_ids.push_back(a.listener_id);
  }

  run_stage("score-enh", [&] {
    for (const char* id : {"baseline_enh", "passthrough_enh"}) {
      const EnhancementScore score =
          score_enhancement(store.get(id), manifest, scene_dir, listeners, panel,
                            config.enhancer, out_dir / "probe");
      const std::string rel = std::string("panel/") + id + ".csv";
      csv::write(out_dir / rel, score.per_signal);
      enh_scores[id] = score.mean_si;
      breakdowns[id] = rel;
      if (std::string(id) == "baseline_enh") {
        baseline_panel_table = score.per_signal;
        result.baseline_mean_si = score.mean_si;
        result.baseline_mean_si_impaired = mean_over_listeners(score.per_signal, impaired_ids);
      } else {
        result.passthrough_mean_si = score.mean_si;
        result.passthrough_mean_si_impaired =
            mean_over_listeners(score.per_signal, impaired_ids);
      }
    }
  });

  std::map<std::string, double> pred_scores;
  run_stage("score-pred", [&] {
    const PredictionScore score = score_prediction(store.get("baseline_pred"),
                                                   baseline_panel_table);
    const std::string rel = "panel/baseline_pred_breakdown.csv";
    csv::write(out_dir / rel, score.per_signal);
    pred_scores["baseline_pred"] = score.mse;
    breakdowns["baseline_pred"] = rel;
    result.prediction_mse = score.mse;
    result.constant_mean_mse = variance_of_scores(baseline_panel_table);
  });

  run_stage("rank", [&] {
    result.enhancement_board =
        rank_and_cap(store.entries(), enh_scores, EntryKind::enhancement, breakdowns);
    result.prediction_board =
        rank_and_cap(store.entries(), pred_scores, EntryKind::prediction, breakdowns);
    csv::write(out_dir / "leaderboard_enhancement.csv",
               leaderboard_table(result.enhancement_board));
    csv::write(out_dir / "leaderboard_prediction.csv",
               leaderboard_table(result.prediction_board));
  });

  run_stage("summary", [&] {
    const nlohmann::json summary{
        {"format", "spin-summary-v1"},
        {"seed", config.seed},
        {"scene_count", config.dataset.scene_count},
        {"listener_count", config.listener_count},
        {"logistic",
         {{"slope", logistic.slope},
          {"midpoint", logistic.midpoint},
          {"source", result.logistic_source}}},
        {"enhancement",
         {{"baseline_enh",
           {{"mean_si", result.baseline_mean_si},
            {"mean_si_impaired", result.baseline_mean_si_impaired}}},
          {"passthrough_enh",
           {{"mean_si", result.passthrough_mean_si},
            {"mean_si_impaired", result.passthrough_mean_si_impaired}}}}},
        {"prediction",
         {{"baseline_pred", {{"mse", result.prediction_mse}}},
          {"constant_mean", {{"mse", result.constant_mean_mse}}}}},
        {"panel", {{"score_mean", mean_of_scores(baseline_panel_table)},
                   {"score_variance", variance_of_scores(baseline_panel_table)}}}};
    std::ofstream out(out_dir / "summary.json");
    if (!out) throw IoError("cannot write summary.json");
    out << summary.dump(2) << "\n";
  });

  return result;
}

}  // namespace spinsim
