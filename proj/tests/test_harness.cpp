#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <type_traits>
#include <vector>

#include "spinsim/common.hpp"
#include "spinsim/csv.hpp"
#include "spinsim/entry.hpp"
#include "spinsim/scoring.hpp"
#include "spinsim/wav.hpp"

using namespace spinsim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("spinsim_harness_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

wav::WavData stereo_tone(double fs, std::size_t frames, double f0) {
  wav::WavData w;
  w.sample_rate = fs;
  w.channels.assign(2, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    const double t = static_cast<double>(i) / fs;
    w.channels[0][i] = 0.25 * std::sin(2.0 * 3.14159265358979 * f0 * t);
    w.channels[1][i] = 0.25 * std::cos(2.0 * 3.14159265358979 * f0 * t);
  }
  return w;
}

CoverageSpec small_coverage() {
  CoverageSpec c;
  c.scene_ids = {"S0001", "S0002"};
  c.listener_ids = {"P000", "P001"};
  c.sample_rate = 16000.0;
  return c;
}

void write_full_payload(const fs::path& dir, const CoverageSpec& coverage) {
  fs::create_directories(dir);
  double f0 = 200.0;
  for (const std::string& s : coverage.scene_ids) {
    for (const std::string& l : coverage.listener_ids) {
      wav::write(dir / enhanced_wav_name(s, l), stereo_tone(coverage.sample_rate, 512, f0));
      f0 += 50.0;
    }
  }
}

Entry enhancement_entry(const fs::path& payload, const std::string& id = "E001",
                        const std::string& team = "team_a") {
  Entry e;
  e.entry_id = id;
  e.team_id = team;
  e.kind = EntryKind::enhancement;
  e.payload_path = payload;
  e.metadata.processor_cmd = "builtin:passthrough";
  return e;
}

csv::Table score_table(const std::vector<double>& scores) {
  csv::Table t;
  t.header = {"scene_id", "listener_id", "si_measured"};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    t.rows.push_back({"S" + std::to_string(i), "P0", csv::format_double(scores[i])});
  }
  return t;
}

Entry prediction_entry(const fs::path& csv_path, const std::string& id = "Q001",
                       const std::string& team = "team_p") {
  Entry e;
  e.entry_id = id;
  e.team_id = team;
  e.kind = EntryKind::prediction;
  e.payload_path = csv_path;
  return e;
}

void write_prediction_csv(const fs::path& path, const csv::Table& measured,
                          double offset = 0.0) {
  csv::Table t;
  t.header = {"scene_id", "listener_id", "score"};
  for (const auto& row : measured.rows) {
    t.rows.push_back({row[0], row[1], csv::format_double(std::stod(row[2]) + offset)});
  }
  csv::write(path, t);
}

}  // namespace

TEST_CASE("entry manifests round-trip through JSON") {
  Entry e = enhancement_entry("/data/payload", "E042", "dyads");
  e.metadata.system_description_path = "docs/system.pdf";
  e.metadata.external_data_declared = true;
  e.metadata.anonymous = true;
  const Entry back = entry_from_json(entry_to_json(e));
  CHECK(back.entry_id == e.entry_id);
  CHECK(back.team_id == e.team_id);
  CHECK(back.kind == e.kind);
  CHECK(back.payload_path == e.payload_path);
  CHECK(back.metadata.system_description_path == e.metadata.system_description_path);
  CHECK(back.metadata.external_data_declared == e.metadata.external_data_declared);
  CHECK(back.metadata.anonymous == e.metadata.anonymous);
  CHECK(back.metadata.processor_cmd == e.metadata.processor_cmd);

  CHECK(parse_entry_kind("prediction") == EntryKind::prediction);
  CHECK(std::string(entry_kind_name(EntryKind::prediction)) == "prediction");
  CHECK_THROWS_AS(parse_entry_kind("oracle"), SchemaError);

  nlohmann::json j = entry_to_json(e);
  j.erase("team_id");
  CHECK_THROWS_AS(entry_from_json(j), SchemaError);
  j = entry_to_json(e);
  j["entry_id"] = "";
  CHECK_THROWS_AS(entry_from_json(j), SchemaError);
}

TEST_CASE("entry store is unique by id") {
  EntryStore store;
  store.add(enhancement_entry("/a", "E001"));
  store.add(enhancement_entry("/b", "E002"));
  CHECK(store.entries().size() == 2);
  CHECK(store.get("E002").payload_path == fs::path("/b"));
  CHECK_THROWS_AS(store.add(enhancement_entry("/c", "E001")), ValidationError);
  CHECK_THROWS_AS(store.get("E999"), NotFoundError);
}

TEST_CASE("enhancement ingest demands full stereo coverage at the dataset rate") {
  TempDir tmp("enh_ingest");
  const CoverageSpec coverage = small_coverage();
  const fs::path payload = tmp.path / "payload";
  write_full_payload(payload, coverage);

  const Entry ok = ingest_entry(enhancement_entry(payload), coverage);
  CHECK(ok.entry_id == "E001");

  SUBCASE("a missing pair names the scene") {
    fs::remove(payload / enhanced_wav_name("S0002", "P000"));
    try {
      ingest_entry(enhancement_entry(payload), coverage);
      FAIL("expected IncompleteEntryError");
    } catch (const IncompleteEntryError& e) {
      CHECK(std::string(e.what()).find("S0002") != std::string::npos);
    }
  }
  SUBCASE("mono audio is rejected") {
    wav::WavData mono;
    mono.sample_rate = coverage.sample_rate;
    mono.channels = {std::vector<double>(512, 0.1)};
    wav::write(payload / enhanced_wav_name("S0001", "P001"), mono);
    CHECK_THROWS_AS(ingest_entry(enhancement_entry(payload), coverage), SchemaError);
  }
  SUBCASE("a sample-rate mismatch is rejected") {
    wav::write(payload / enhanced_wav_name("S0001", "P001"), stereo_tone(44100.0, 512, 300.0));
    CHECK_THROWS_AS(ingest_entry(enhancement_entry(payload), coverage), SchemaError);
  }
  SUBCASE("garbage bytes are rejected") {
    std::ofstream(payload / enhanced_wav_name("S0001", "P001")) << "not a wav";
    CHECK_THROWS_AS(ingest_entry(enhancement_entry(payload), coverage), SchemaError);
  }
  SUBCASE("a payload that is not a directory is an IO error") {
    CHECK_THROWS_AS(ingest_entry(enhancement_entry(tmp.path / "nowhere"), coverage), IoError);
  }
}

TEST_CASE("prediction ingest checks schema, range, duplicates, and coverage") {
  TempDir tmp("pred_ingest");
  const CoverageSpec coverage = small_coverage();
  const fs::path path = tmp.path / "scores.csv";

  csv::Table t;
  t.header = {"scene_id", "listener_id", "score"};
  for (const std::string& s : coverage.scene_ids) {
    for (const std::string& l : coverage.listener_ids) {
      t.rows.push_back({s, l, "0.5"});
    }
  }
  csv::write(path, t);
  CHECK(ingest_entry(prediction_entry(path), coverage).entry_id == "Q001");

  SUBCASE("scores must lie in [0, 1]") {
    t.rows[1][2] = "1.3";
    csv::write(path, t);
    CHECK_THROWS_AS(ingest_entry(prediction_entry(path), coverage), ScoreRangeError);
    t.rows[1][2] = "-0.01";
    csv::write(path, t);
    CHECK_THROWS_AS(ingest_entry(prediction_entry(path), coverage), ScoreRangeError);
    t.rows[1][2] = "nan";
    csv::write(path, t);
    CHECK_THROWS_AS(ingest_entry(prediction_entry(path), coverage), ScoreRangeError);
  }
  SUBCASE("duplicate pairs are rejected") {
    t.rows.push_back(t.rows[0]);
    csv::write(path, t);
    CHECK_THROWS_AS(ingest_entry(prediction_entry(path), coverage), SchemaError);
  }
  SUBCASE("a missing pair is incomplete") {
    t.rows.pop_back();
    csv::write(path, t);
    CHECK_THROWS_AS(ingest_entry(prediction_entry(path), coverage), IncompleteEntryError);
  }
  SUBCASE("the score column is mandatory") {
    t.header = {"scene_id", "listener_id", "value"};
    csv::write(path, t);
    CHECK_THROWS_AS(ingest_entry(prediction_entry(path), coverage), SchemaError);
  }
  SUBCASE("non-numeric scores are rejected") {
    t.rows[0][2] = "high";
    csv::write(path, t);
    CHECK_THROWS_AS(ingest_entry(prediction_entry(path), coverage), SchemaError);
  }
}

TEST_CASE("manifest ingest resolves relative payload paths") {
  TempDir tmp("manifest");
  const CoverageSpec coverage = small_coverage();
  write_full_payload(tmp.path / "payload", coverage);

  Entry e = enhancement_entry("payload", "E007", "team_m");
  const fs::path manifest = tmp.path / "entry.json";
  std::ofstream(manifest) << entry_to_json(e).dump(2);

  const Entry loaded = ingest_entry(manifest, coverage);
  CHECK(loaded.entry_id == "E007");
  CHECK(loaded.payload_path == tmp.path / "payload");

  std::ofstream(tmp.path / "broken.json") << "{not json";
  CHECK_THROWS_AS(ingest_entry(tmp.path / "broken.json", coverage), SchemaError);
  CHECK_THROWS_AS(ingest_entry(tmp.path / "absent.json", coverage), IoError);
}

TEST_CASE("validated payloads load back intact") {
  TempDir tmp("loadback");
  const CoverageSpec coverage = small_coverage();
  const fs::path payload = tmp.path / "payload";
  write_full_payload(payload, coverage);
  const Entry e = ingest_entry(enhancement_entry(payload), coverage);

  const EnhancedOutput out = load_enhanced(e, "S0001", "P000");
  CHECK(out.sample_rate == coverage.sample_rate);
  CHECK(out.left.size() == 512);
  const wav::WavData expect = stereo_tone(coverage.sample_rate, 512, 200.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < 512; ++i) {
    worst = std::max(worst, std::abs(out.left[i] - expect.channels[0][i]));
    worst = std::max(worst, std::abs(out.right[i] - expect.channels[1][i]));
  }
  CHECK(worst < 1e-6);  // float32 storage
  CHECK_THROWS_AS(load_enhanced(e, "S0001", "P999"), NotFoundError);

  const fs::path csv_path = tmp.path / "scores.csv";
  csv::Table t;
  t.header = {"scene_id", "listener_id", "score"};
  t.rows = {{"S0001", "P000", "0.25"}, {"S0001", "P001", "0.75"}};
  csv::write(csv_path, t);
  Entry p = prediction_entry(csv_path);
  const auto predictions = load_predictions(p);
  REQUIRE(predictions.size() == 2);
  CHECK(predictions.at({"S0001", "P000"}) == 0.25);
  CHECK(predictions.at({"S0001", "P001"}) == 0.75);
}

TEST_CASE("panel table statistics are the population moments") {
  const csv::Table t = score_table({0.1, 0.4, 0.7, 0.2});
  CHECK(mean_of_scores(t) == doctest::Approx(0.35).epsilon(1e-15));
  const double mean = 0.35;
  double var = 0.0;
  for (double v : {0.1, 0.4, 0.7, 0.2}) var += (v - mean) * (v - mean);
  var /= 4.0;
  CHECK(variance_of_scores(t) == doctest::Approx(var).epsilon(1e-15));

  csv::Table named_score = t;
  named_score.header = {"scene_id", "listener_id", "score"};
  CHECK(mean_of_scores(named_score) == doctest::Approx(0.35).epsilon(1e-15));

  csv::Table empty = t;
  empty.rows.clear();
  CHECK_THROWS_AS(mean_of_scores(empty), ValidationError);
  csv::Table unnamed = t;
  unnamed.header = {"scene_id", "listener_id", "value"};
  CHECK_THROWS_AS(mean_of_scores(unnamed), ValidationError);
}

TEST_CASE("prediction scoring reproduces the squared-error identities") {
  TempDir tmp("pred_score");
  const csv::Table measured = score_table({0.25, 0.5, 0.75, 0.5});

  const fs::path exact_csv = tmp.path / "exact.csv";
  write_prediction_csv(exact_csv, measured);
  const PredictionScore exact = score_prediction(prediction_entry(exact_csv, "Qexact"), measured);
  CHECK(exact.mse == 0.0);
  CHECK(exact.per_signal.header ==
        std::vector<std::string>{"scene_id", "listener_id", "predicted", "measured",
                                 "squared_error"});
  CHECK(exact.per_signal.rows.size() == measured.rows.size());

  // A constant predictor at the mean scores exactly the panel variance.
  csv::Table constant;
  constant.header = {"scene_id", "listener_id", "score"};
  const double mean = mean_of_scores(measured);
  for (const auto& row : measured.rows) {
    constant.rows.push_back({row[0], row[1], csv::format_double(mean)});
  }
  const fs::path const_csv = tmp.path / "constant.csv";
  csv::write(const_csv, constant);
  const PredictionScore c = score_prediction(prediction_entry(const_csv, "Qconst"), measured);
  CHECK(std::abs(c.mse - variance_of_scores(measured)) < 1e-12);

  const fs::path biased_csv = tmp.path / "biased.csv";
  write_prediction_csv(biased_csv, measured, 0.1);
  const PredictionScore biased =
      score_prediction(prediction_entry(biased_csv, "Qbias"), measured);
  CHECK(biased.mse == doctest::Approx(0.01).epsilon(1e-12));

  csv::Table shy = measured;
  shy.rows.push_back({"S9", "P0", "0.5"});
  CHECK_THROWS_AS(score_prediction(prediction_entry(exact_csv, "Qshy"), shy),
                  IncompleteEntryError);
  CHECK_THROWS_AS(score_prediction(enhancement_entry("/x", "Ewrong"), measured),
                  ValidationError);
  csv::Table empty = measured;
  empty.rows.clear();
  CHECK_THROWS_AS(score_prediction(prediction_entry(exact_csv, "Qempty"), empty),
                  IncompletePanelError);
}

TEST_CASE("leaderboards rank by score and cap panel eligibility per team") {
  std::vector<Entry> entries = {
      enhancement_entry("/1", "E_a1", "alpha"), enhancement_entry("/2", "E_a2", "alpha"),
      enhancement_entry("/3", "E_a3", "alpha"), enhancement_entry("/4", "E_b1", "beta")};
  std::map<std::string, double> scores = {
      {"E_a1", 0.61}, {"E_a2", 0.72}, {"E_a3", 0.55}, {"E_b1", 0.66}};

  const Leaderboard board = rank_and_cap(entries, scores, EntryKind::enhancement);
  REQUIRE(board.rows.size() == 4);
  CHECK(board.rows[0].entry_id == "E_a2");
  CHECK(board.rows[1].entry_id == "E_b1");
  CHECK(board.rows[2].entry_id == "E_a1");
  CHECK(board.rows[3].entry_id == "E_a3");

  // Three entries from one team: exactly two stay panel-eligible.
  int alpha_eligible = 0;
  for (const auto& row : board.rows) {
    if (row.team_id == "alpha" && row.panel_eligible) ++alpha_eligible;
  }
  CHECK(alpha_eligible == 2);
  CHECK(board.rows[0].panel_eligible);
  CHECK(board.rows[1].panel_eligible);
  CHECK(board.rows[2].panel_eligible);
  CHECK_FALSE(board.rows[3].panel_eligible);

  // Input order does not matter.
  std::vector<Entry> shuffled = {entries[3], entries[1], entries[0], entries[2]};
  const Leaderboard reshuffled = rank_and_cap(shuffled, scores, EntryKind::enhancement);
  for (std::size_t i = 0; i < board.rows.size(); ++i) {
    CHECK(reshuffled.rows[i].entry_id == board.rows[i].entry_id);
    CHECK(reshuffled.rows[i].panel_eligible == board.rows[i].panel_eligible);
  }

  SUBCASE("ties break on entry_id") {
    scores["E_a1"] = 0.66;
    const Leaderboard tied = rank_and_cap(entries, scores, EntryKind::enhancement);
    CHECK(tied.rows[1].entry_id == "E_a1");
    CHECK(tied.rows[2].entry_id == "E_b1");
  }
  SUBCASE("prediction boards sort ascending") {
    std::vector<Entry> preds = {prediction_entry("/p1", "Q1", "gamma"),
                                prediction_entry("/p2", "Q2", "gamma")};
    const Leaderboard asc =
        rank_and_cap(preds, {{"Q1", 0.04}, {"Q2", 0.02}}, EntryKind::prediction);
    CHECK(asc.rows[0].entry_id == "Q2");
    CHECK(asc.rows[1].entry_id == "Q1");
    const csv::Table table = leaderboard_table(asc);
    CHECK(table.header == std::vector<std::string>{"rank", "entry_id", "team_id", "mse",
                                                   "panel_eligible", "breakdown"});
    CHECK(table.rows[0][0] == "1");
    CHECK(table.rows[0][1] == "Q2");
    CHECK(table.rows[0][4] == "true");
  }
  SUBCASE("unscored entries fail loudly") {
    scores.erase("E_a3");
    CHECK_THROWS_AS(rank_and_cap(entries, scores, EntryKind::enhancement), ValidationError);
  }
  SUBCASE("the rendered table carries mean_si and ranks from one") {
    const csv::Table table = leaderboard_table(board);
    CHECK(table.header[3] == "mean_si");
    REQUIRE(table.rows.size() == 4);
    CHECK(table.rows[3][0] == "4");
    CHECK(table.rows[3][4] == "false");
    CHECK(std::stod(table.rows[0][3]) == 0.72);
  }
}

TEST_CASE("the causality rule gates entries") {
  static_assert(std::is_base_of_v<RulesError, DisqualifiedEntryError>);
  TempDir tmp("causality_rule");
  ProcessorConfig config;
  CausalityProbeOptions options;
  options.cut_count = 4;
  options.duration_s = 0.3;

  Entry ok = enhancement_entry("/none", "E_ok");
  ok.metadata.processor_cmd = "builtin:passthrough";
  const CausalityReport report =
      enforce_causality_rule(ok, config, 16000.0, 2, tmp.path, 5.0, options);
  CHECK(report.passed);
  CHECK(report.limit_ms == 5.0);
  CHECK(report.measured_lookahead_ms <= 0.0625);

  // The baseline looks 1 ms ahead; a tighter limit disqualifies it.
  Entry peek = enhancement_entry("/none", "E_peek");
  peek.metadata.processor_cmd = "builtin:baseline";
  try {
    enforce_causality_rule(peek, config, 16000.0, 2, tmp.path, 0.25, options);
    FAIL("expected DisqualifiedEntryError");
  } catch (const DisqualifiedEntryError& e) {
    CHECK(e.exit_code() == 3);
    CHECK(std::string(e.what()).find("disqualified") != std::string::npos);
    CHECK(std::string(e.what()).find("E_peek") != std::string::npos);
  }

  Entry silent = enhancement_entry("/none", "E_undeclared");
  silent.metadata.processor_cmd = "";
  CHECK_THROWS_AS(enforce_causality_rule(silent, config, 16000.0, 2, tmp.path, 5.0, options),
                  ValidationError);
}
