#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spinsim/causality.hpp"
#include "spinsim/common.hpp"
#include "spinsim/corpus.hpp"
#include "spinsim/csv.hpp"
#include "spinsim/dataset.hpp"
#include "spinsim/entry.hpp"
#include "spinsim/hearing_loss.hpp"
#include "spinsim/intelligibility.hpp"
#include "spinsim/panel.hpp"
#include "spinsim/pipeline.hpp"
#include "spinsim/rng.hpp"
#include "spinsim/scoring.hpp"
#include "spinsim/wav.hpp"

namespace {

using namespace spinsim;

PipelineConfig config_or_default(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_pipeline_config(path);
}

CoverageSpec coverage_of(const DatasetManifest& manifest,
                         const std::vector<Audiogram>& listeners) {
  CoverageSpec c;
  for (const SceneSpec* s : manifest.split("test")) c.scene_ids.push_back(s->scene_id);
  for (const Audiogram& a : listeners) c.listener_ids.push_back(a.listener_id);
  c.sample_rate = manifest.config.sample_rate;
  return c;
}

std::vector<SpinSignalSet> load_split_audio(const DatasetManifest& manifest,
                                            const std::string& split,
                                            const std::filesystem::path& scene_dir) {
  std::vector<SpinSignalSet> out;
  for (const SceneSpec* s : manifest.split(split)) {
    out.push_back(load_scene_audio(*s, scene_dir));
  }
  return out;
}

EnhancedOutput read_enhanced_wav(const std::filesystem::path& p, const std::string& scene_id,
                                 const std::string& listener_id) {
  wav::WavData w = wav::read(p);
  if (w.channels.size() != 2) throw SchemaError("expected stereo WAV: " + p.string());
  EnhancedOutput out;
  out.scene_id = scene_id;
  out.listener_id = listener_id;
  out.sample_rate = w.sample_rate;
  out.left = std::move(w.channels[0]);
  out.right = std::move(w.channels[1]);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binaural speech-in-noise challenge simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = "out";
  int jobs = 1;
  app.add_option("--config", config_path, "Pipeline config JSON")->expected(1);
  app.add_option("--seed", seed, "Master seed override")
      ->expected(1)
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--jobs", jobs, "Worker thread count");
  app.fallthrough();

  auto master_config = [&]() {
    PipelineConfig c = config_or_default(config_path);
    if (seed_set) c.seed = seed;
    c.jobs = jobs;
    return c;
  };

  // gen-scenes: draw the dataset plan, no audio.
  {
    CLI::App* cmd = app.add_subcommand("gen-scenes", "Sample the scene manifest");
    cmd->callback([&] {
      const PipelineConfig c = master_config();
      c.validate();
      DatasetConfig dc = c.dataset;
      dc.seed = derive_seed(c.seed, "dataset");
      const BuiltinCorpus corpus(dc.sample_rate);
      const DatasetManifest manifest = plan_dataset(dc, corpus);
      std::filesystem::create_directories(out_dir);
      std::ofstream out(std::filesystem::path(out_dir) / "manifest.json");
      if (!out) throw IoError("cannot write manifest.json in " + out_dir);
      out << manifest_to_json(manifest).dump(2) << "\n";
      std::cout << "scenes=" << manifest.scenes.size() << "\n";
    });
  }

  // render: audio for an existing plan.
  {
    CLI::App* cmd = app.add_subcommand("render", "Render scene audio from a manifest");
    auto manifest_path = std::make_shared<std::string>();
    cmd->add_option("--manifest", *manifest_path, "Scene manifest JSON")->required();
    cmd->callback([&, manifest_path] {
      DatasetManifest manifest = load_manifest(*manifest_path);
      const BuiltinCorpus corpus(manifest.config.sample_rate);
      const BuiltinInterferers interferers(manifest.config.sample_rate);
      render_dataset(manifest, corpus, interferers, out_dir, jobs);
      std::cout << "rendered=" << manifest.scenes.size() << "\n";
    });
  }

  // gen-listeners
  {
    CLI::App* cmd = app.add_subcommand("gen-listeners", "Sample the listener panel");
    auto count = std::make_shared<int>(10);
    cmd->add_option("--count", *count, "Panel size");
    cmd->callback([&, count] {
      const PipelineConfig c = master_config();
      const std::vector<Audiogram> listeners =
          generate_panel(*count, derive_seed(c.seed, "listeners"));
      std::filesystem::create_directories(out_dir);
      write_listeners(std::filesystem::path(out_dir) / "listeners.json", listeners);
      std::cout << "listeners=" << listeners.size() << "\n";
    });
  }

  // enhance: run a built-in processor over a split.
  {
    CLI::App* cmd = app.add_subcommand("enhance", "Run a processor over scene-listener pairs");
    auto manifest_path = std::make_shared<std::string>();
    auto scenes_dir = std::make_shared<std::string>();
    auto listeners_path = std::make_shared<std::string>();
    auto split = std::make_shared<std::string>("test");
    auto processor = std::make_shared<std::string>("builtin:baseline");
    cmd->add_option("--manifest", *manifest_path, "Scene manifest JSON")->required();
    cmd->add_option("--scenes", *scenes_dir, "Rendered scene directory")->required();
    cmd->add_option("--listeners", *listeners_path, "Listener panel JSON")->required();
    cmd->add_option("--split", *split, "Dataset split");
    cmd->add_option("--processor", *processor, "builtin:baseline or builtin:passthrough");
    cmd->callback([&, manifest_path, scenes_dir, listeners_path, split, processor] {
      const PipelineConfig c = master_config();
      const DatasetManifest manifest = load_manifest(*manifest_path);
      const std::vector<Audiogram> listeners = read_listeners(*listeners_path);
      const bool use_baseline = *processor == "builtin:baseline";
      if (!use_baseline && *processor != "builtin:passthrough") {
        throw ValidationError("unknown processor: " + *processor);
      }
      std::filesystem::create_directories(out_dir);
      int written = 0;
      for (const SceneSpec* spec : manifest.split(*split)) {
        const SpinSignalSet scene = load_scene_audio(*spec, *scenes_dir);
        for (const Audiogram& listener : listeners) {
          const EnhancedOutput out = use_baseline ? enhance(scene, c.enhancer, listener)
                                                  : passthrough(scene, listener);
          wav::WavData w;
          w.sample_rate = out.sample_rate;
          w.channels = {out.left, out.right};
          wav::write(std::filesystem::path(out_dir) /
                         enhanced_wav_name(spec->scene_id, listener.listener_id),
                     w);
          ++written;
        }
      }
      std::cout << "enhanced=" << written << "\n";
    });
  }

  // degrade: hearing loss simulation of a WAV.
  {
    CLI::App* cmd = app.add_subcommand("degrade", "Apply a listener's hearing loss to a WAV");
    auto listeners_path = std::make_shared<std::string>();
    auto listener_id = std::make_shared<std::string>();
    auto in_path = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--listeners", *listeners_path, "Listener panel JSON")->required();
    cmd->add_option("--listener", *listener_id, "Listener id")->required();
    cmd->add_option("input", *in_path, "Input WAV")->required();
    cmd->add_option("output", *out_path, "Output WAV")->required();
    cmd->callback([listeners_path, listener_id, in_path, out_path] {
      const std::vector<Audiogram> listeners = read_listeners(*listeners_path);
      const Audiogram* audiogram = nullptr;
      for (const Audiogram& a : listeners) {
        if (a.listener_id == *listener_id) audiogram = &a;
      }
      if (!audiogram) throw NotFoundError("no listener " + *listener_id);
      wav::WavData w = wav::read(*in_path);
      if (w.channels.empty() || w.channels.size() > 2) {
        throw MalformedInputError("degrade expects a mono or stereo WAV");
      }
      for (std::size_t ch = 0; ch < w.channels.size(); ++ch) {
        const Ear ear = ch == 0 ? Ear::left : Ear::right;
        w.channels[ch] =
            simulate_hearing_loss(w.channels[ch], *audiogram, ear, w.sample_rate);
      }
      wav::write(*out_path, w);
    });
  }

  // panel: simulated listening test over an entry's signals.
  {
    CLI::App* cmd = app.add_subcommand("panel", "Measure an entry with the simulated panel");
    auto manifest_path = std::make_shared<std::string>();
    auto scenes_dir = std::make_shared<std::string>();
    auto listeners_path = std::make_shared<std::string>();
    auto entry_path = std::make_shared<std::string>();
    auto table_out = std::make_shared<std::string>("panel.csv");
    cmd->add_option("--manifest", *manifest_path, "Scene manifest JSON")->required();
    cmd->add_option("--scenes", *scenes_dir, "Rendered scene directory")->required();
    cmd->add_option("--listeners", *listeners_path, "Listener panel JSON")->required();
    cmd->add_option("--entry", *entry_path, "Enhancement entry manifest")->required();
    cmd->add_option("--table", *table_out, "Output CSV path");
    cmd->callback([&, manifest_path, scenes_dir, listeners_path, entry_path, table_out] {
      const PipelineConfig c = master_config();
      const DatasetManifest manifest = load_manifest(*manifest_path);
      const std::vector<Audiogram> listeners = read_listeners(*listeners_path);
      const Entry entry = ingest_entry(std::filesystem::path(*entry_path),
                                       coverage_of(manifest, listeners));
      PanelConfig panel = c.panel;
      panel.response_seed = derive_seed(c.seed, "panel");
      const std::vector<SpinSignalSet> scenes =
          load_split_audio(manifest, "test", *scenes_dir);
      const csv::Table table = panel_measure(
          scenes, listeners,
          [&entry](const std::string& s, const std::string& l) {
            return load_enhanced(entry, s, l);
          },
          panel);
      csv::write(*table_out, table);
      std::cout << "mean_si=" << csv::format_double(mean_of_scores(table)) << "\n";
    });
  }

  // predict: intelligibility predictions for an enhancement entry's signals.
  {
    CLI::App* cmd = app.add_subcommand("predict", "Predict intelligibility for an entry");
    auto manifest_path = std::make_shared<std::string>();
    auto scenes_dir = std::make_shared<std::string>();
    auto listeners_path = std::make_shared<std::string>();
    auto entry_path = std::make_shared<std::string>();
    auto table_out = std::make_shared<std::string>("predictions.csv");
    auto slope = std::make_shared<double>(LogisticMap{}.slope);
    auto midpoint = std::make_shared<double>(LogisticMap{}.midpoint);
    cmd->add_option("--manifest", *manifest_path, "Scene manifest JSON")->required();
    cmd->add_option("--scenes", *scenes_dir, "Rendered scene directory")->required();
    cmd->add_option("--listeners", *listeners_path, "Listener panel JSON")->required();
    cmd->add_option("--entry", *entry_path, "Enhancement entry manifest")->required();
    cmd->add_option("--table", *table_out, "Output CSV path");
    cmd->add_option("--slope", *slope, "Logistic slope");
    cmd->add_option("--midpoint", *midpoint, "Logistic midpoint");
    cmd->callback([manifest_path, scenes_dir, listeners_path, entry_path, table_out, slope,
                   midpoint] {
      const DatasetManifest manifest = load_manifest(*manifest_path);
      const std::vector<Audiogram> listeners = read_listeners(*listeners_path);
      const Entry entry = ingest_entry(std::filesystem::path(*entry_path),
                                       coverage_of(manifest, listeners));
      const LogisticMap map{*slope, *midpoint};
      map.validate();
      csv::Table t;
      t.header = {"scene_id", "listener_id", "score"};
      for (const SceneSpec* spec : manifest.split("test")) {
        const SpinSignalSet scene = load_scene_audio(*spec, *scenes_dir);
        for (const Audiogram& listener : listeners) {
          const EnhancedOutput out =
              load_enhanced(entry, spec->scene_id, listener.listener_id);
          const IntelligibilityScore s = predict_intelligibility(scene, out, listener, map);
          t.rows.push_back(
              {spec->scene_id, listener.listener_id, csv::format_double(s.score)});
        }
      }
      csv::write(*table_out, t);
      std::cout << "predicted=" << t.rows.size() << "\n";
    });
  }

  // score-enh: causality gate + panel + mean SI.
  {
    CLI::App* cmd = app.add_subcommand("score-enh", "Score an enhancement entry");
    auto manifest_path = std::make_shared<std::string>();
    auto scenes_dir = std::make_shared<std::string>();
    auto listeners_path = std::make_shared<std::string>();
    auto entry_path = std::make_shared<std::string>();
    cmd->add_option("--manifest", *manifest_path, "Scene manifest JSON")->required();
    cmd->add_option("--scenes", *scenes_dir, "Rendered scene directory")->required();
    cmd->add_option("--listeners", *listeners_path, "Listener panel JSON")->required();
    cmd->add_option("--entry", *entry_path, "Enhancement entry manifest")->required();
    cmd->callback([&, manifest_path, scenes_dir, listeners_path, entry_path] {
      const PipelineConfig c = master_config();
      const DatasetManifest manifest = load_manifest(*manifest_path);
      const std::vector<Audiogram> listeners = read_listeners(*listeners_path);
      const Entry entry = ingest_entry(std::filesystem::path(*entry_path),
                                       coverage_of(manifest, listeners));
      PanelConfig panel = c.panel;
      panel.response_seed = derive_seed(c.seed, "panel");
      std::filesystem::create_directories(out_dir);
      const EnhancementScore score =
          score_enhancement(entry, manifest, *scenes_dir, listeners, panel, c.enhancer,
                            std::filesystem::path(out_dir) / "probe");
      csv::write(std::filesystem::path(out_dir) / (entry.entry_id + "_breakdown.csv"),
                 score.per_signal);
      std::cout << "lookahead_ms=" << csv::format_double(score.causality.measured_lookahead_ms)
                << "\n";
      std::cout << "mean_si=" << csv::format_double(score.mean_si) << "\n";
    });
  }

  // score-pred: MSE against a measured panel table.
  {
    CLI::App* cmd = app.add_subcommand("score-pred", "Score a prediction entry");
    auto manifest_path = std::make_shared<std::string>();
    auto listeners_path = std::make_shared<std::string>();
    auto entry_path = std::make_shared<std::string>();
    auto panel_path = std::make_shared<std::string>();
    cmd->add_option("--manifest", *manifest_path, "Scene manifest JSON")->required();
    cmd->add_option("--listeners", *listeners_path, "Listener panel JSON")->required();
    cmd->add_option("--entry", *entry_path, "Prediction entry manifest")->required();
    cmd->add_option("--panel", *panel_path, "Measured panel CSV")->required();
    cmd->callback([&, manifest_path, listeners_path, entry_path, panel_path] {
      const DatasetManifest manifest = load_manifest(*manifest_path);
      const std::vector<Audiogram> listeners = read_listeners(*listeners_path);
      const Entry entry = ingest_entry(std::filesystem::path(*entry_path),
                                       coverage_of(manifest, listeners));
      const csv::Table panel_table = csv::read(*panel_path);
      const PredictionScore score = score_prediction(entry, panel_table);
      std::filesystem::create_directories(out_dir);
      csv::write(std::filesystem::path(out_dir) / (entry.entry_id + "_breakdown.csv"),
                 score.per_signal);
      std::cout << "mse=" << csv::format_double(score.mse) << "\n";
    });
  }

  // rank: leaderboard from scored entries.
  {
    CLI::App* cmd = app.add_subcommand("rank", "Build a leaderboard from scored entries");
    auto entry_paths = std::make_shared<std::vector<std::string>>();
    auto scores_path = std::make_shared<std::string>();
    auto kind_name = std::make_shared<std::string>("enhancement");
    auto table_out = std::make_shared<std::string>("leaderboard.csv");
    cmd->add_option("--entry", *entry_paths, "Entry manifest (repeatable)")->required();
    cmd->add_option("--scores", *scores_path, "CSV with columns entry_id,score")->required();
    cmd->add_option("--kind", *kind_name, "enhancement or prediction");
    cmd->add_option("--table", *table_out, "Output CSV path");
    cmd->callback([entry_paths, scores_path, kind_name, table_out] {
      std::vector<Entry> entries;
      for (const std::string& p : *entry_paths) {
        std::ifstream in(p);
        if (!in) throw IoError("cannot open entry manifest " + p);
        nlohmann::json j;
        in >> j;
        entries.push_back(entry_from_json(j));
      }
      const csv::Table scores_table = csv::read(*scores_path);
      const int c_id = scores_table.column("entry_id");
      const int c_score = scores_table.column("score");
      if (c_id < 0 || c_score < 0) {
        throw SchemaError("scores CSV must have columns entry_id,score");
      }
      std::map<std::string, double> scores;
      for (const auto& row : scores_table.rows) {
        scores[row[static_cast<std::size_t>(c_id)]] =
            std::stod(row[static_cast<std::size_t>(c_score)]);
      }
      const Leaderboard board =
          rank_and_cap(entries, scores, parse_entry_kind(*kind_name));
      csv::write(*table_out, leaderboard_table(board));
      std::cout << "ranked=" << board.rows.size() << "\n";
    });
  }

  // verify-causality: probe a processor command.
  {
    CLI::App* cmd = app.add_subcommand("verify-causality", "Probe a processor's lookahead");
    auto processor = std::make_shared<std::string>();
    auto sample_rate = std::make_shared<double>(44100.0);
    auto channels = std::make_shared<int>(6);
    auto max_ms = std::make_shared<double>(kMaxLookaheadMs);
    auto cuts = std::make_shared<int>(40);
    auto workdir = std::make_shared<std::string>();
    cmd->add_option("--processor", *processor,
                    "builtin:baseline, builtin:passthrough, or a command with {in}/{out}")
        ->required();
    cmd->add_option("--sample-rate", *sample_rate, "Probe sample rate");
    cmd->add_option("--channels", *channels, "Probe channel count");
    cmd->add_option("--max-ms", *max_ms, "Lookahead limit in milliseconds");
    cmd->add_option("--cuts", *cuts, "Probe cut count");
    cmd->add_option("--workdir", *workdir, "Scratch directory for external commands");
    cmd->callback([&, processor, sample_rate, channels, max_ms, cuts, workdir] {
      const PipelineConfig c = master_config();
      const std::filesystem::path wd =
          workdir->empty() ? std::filesystem::path(out_dir) / "probe"
                           : std::filesystem::path(*workdir);
      const Processor p = resolve_processor(*processor, c.enhancer, wd);
      CausalityProbeOptions opts;
      opts.channels = *channels;
      opts.cut_count = *cuts;
      const CausalityReport report = verify_causality(p, *sample_rate, *max_ms, opts);
      std::cout << "lookahead_ms=" << csv::format_double(report.measured_lookahead_ms) << "\n"
                << "limit_ms=" << csv::format_double(report.limit_ms) << "\n"
                << "passed=" << (report.passed ? "true" : "false") << "\n";
      if (!report.passed) {
        throw DisqualifiedEntryError(
            "processor uses " + csv::format_double(report.measured_lookahead_ms) +
            " ms of lookahead (limit " + csv::format_double(report.limit_ms) + " ms)");
      }
    });
  }

  // run-all: the whole round in one command.
  {
    CLI::App* cmd = app.add_subcommand("run-all", "Run the full simulated round");
    cmd->callback([&] {
      const PipelineResult r = run_pipeline(master_config(), out_dir);
      std::cout << "baseline_mean_si=" << csv::format_double(r.baseline_mean_si) << "\n"
                << "passthrough_mean_si=" << csv::format_double(r.passthrough_mean_si) << "\n"
                << "prediction_mse=" << csv::format_double(r.prediction_mse) << "\n"
                << "constant_mean_mse=" << csv::format_double(r.constant_mean_mse) << "\n";
    });
  }

  // shift: fixed time shift, useful as an external probe subject.
  {
    CLI::App* cmd = app.add_subcommand("shift", "Time-shift a WAV by a fixed amount");
    auto in_path = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto lookahead_ms = std::make_shared<double>(0.0);
    cmd->add_option("input", *in_path, "Input WAV")->required();
    cmd->add_option("output", *out_path, "Output WAV")->required();
    cmd->add_option("--lookahead-ms", *lookahead_ms,
                    "Positive values advance the signal (future samples)");
    cmd->callback([in_path, out_path, lookahead_ms] {
      wav::WavData w = wav::read(*in_path);
      const long shift =
          std::lround(*lookahead_ms / 1000.0 * w.sample_rate);
      for (std::vector<double>& ch : w.channels) {
        std::vector<double> shifted(ch.size(), 0.0);
        for (std::size_t n = 0; n < ch.size(); ++n) {
          const long src = static_cast<long>(n) + shift;
          if (src >= 0 && src < static_cast<long>(ch.size())) {
            shifted[n] = ch[static_cast<std::size_t>(src)];
          }
        }
        ch = std::move(shifted);
      }
      wav::write(*out_path, w);
    });
  }

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const spinsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
