#include "spinsim/entry.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "spinsim/common.hpp"
#include "spinsim/csv.hpp"
#include "spinsim/wav.hpp"

namespace spinsim {

const char* entry_kind_name(EntryKind k) {
  return k == EntryKind::enhancement ? "enhancement" : "prediction";
}

EntryKind parse_entry_kind(const std::string& name) {
  if (name == "enhancement") return EntryKind::enhancement;
  if (name == "prediction") return EntryKind::prediction;
  throw SchemaError("unknown entry kind: " + name);
}

nlohmann::json entry_to_json(const Entry& e) {
  return nlohmann::json{{"entry_id", e.entry_id},
                        {"team_id", e.team_id},
                        {"kind", entry_kind_name(e.kind)},
                        {"payload", e.payload_path.string()},
                        {"system_description", e.metadata.system_description_path},
                        {"external_data_declared", e.metadata.external_data_declared},
                        {"anonymous", e.metadata.anonymous},
                        {"processor", e.metadata.processor_cmd}};
}

Entry entry_from_json(const nlohmann::json& j) {
  try {
    Entry e;
    e.entry_id = j.at("entry_id").get<std::string>();
    e.team_id = j.at("team_id").get<std::string>();
    e.kind = parse_entry_kind(j.at("kind").get<std::string>());
    e.payload_path = j.at("payload").get<std::string>();
    e.metadata.system_description_path = j.value("system_description", std::string{});
    e.metadata.external_data_declared = j.value("external_data_declared", false);
    e.metadata.anonymous = j.value("anonymous", false);
    e.metadata.processor_cmd = j.value("processor", std::string{});
    if (e.entry_id.empty()) throw SchemaError("entry_id must be non-empty");
    if (e.team_id.empty()) throw SchemaError("team_id must be non-empty");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw SchemaError(std::string("malformed entry manifest: ") + ex.what());
  }
}

std::string enhanced_wav_name(const std::string& scene_id, const std::string& listener_id) {
  return scene_id + "_" + listener_id + "_enh.wav";
}

namespace {

void validate_enhancement_payload(const Entry& entry, const CoverageSpec& coverage) {
  if (!std::filesystem::is_directory(entry.payload_path)) {
    throw IoError("enhancement payload is not a directory: " + entry.payload_path.string());
  }
  for (const std::string& scene_id : coverage.scene_ids) {
    for (const std::string& listener_id : coverage.listener_ids) {
      const std::filesystem::path p =
          entry.payload_path / enhanced_wav_name(scene_id, listener_id);
      if (!std::filesystem::exists(p)) {
        throw IncompleteEntryError("entry " + entry.entry_id + " is missing scene " + scene_id +
                                   " (listener " + listener_id + "): " + p.filename().string());
      }
      wav::WavData w;
      try {
        w = wav::read(p);
      } catch (const Error&) {
        throw SchemaError("entry " + entry.entry_id + " has malformed audio: " + p.string());
      }
      if (w.channels.size() != 2) {
        throw SchemaError("enhanced signals must be stereo: " + p.string());
      }
      if (w.sample_rate != coverage.sample_rate) {
        throw SchemaError("enhanced signal sample rate mismatch: " + p.string());
      }
    }
  }
}

void validate_prediction_payload(const Entry& entry, const CoverageSpec& coverage) {
  csv::Table table;
  try {
    table = csv::read(entry.payload_path);
  } catch (const Error&) {
    throw SchemaError("entry " + entry.entry_id + " prediction CSV unreadable: " +
                      entry.payload_path.string());
  }
  const int c_scene = table.column("scene_id");
  const int c_listener = table.column("listener_id");
  const int c_score = table.column("score");
  if (c_scene < 0 || c_listener < 0 || c_score < 0) {
    throw SchemaError("prediction CSV must have columns scene_id, listener_id, score");
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& row : table.rows) {
    double score = 0.0;
    try {
      score = std::stod(row[static_cast<std::size_t>(c_score)]);
    } catch (const std::exception&) {
      throw SchemaError("prediction score is not a number in entry " + entry.entry_id);
    }
    if (!(score >= 0.0 && score <= 1.0)) {
      throw ScoreRangeError("prediction score " + row[static_cast<std::size_t>(c_score)] +
                            " outside [0, 1] in entry " + entry.entry_id);
    }
    const auto key = std::make_pair(row[static_cast<std::size_t>(c_scene)],
                                    row[static_cast<std::size_t>(c_listener)]);
    if (!seen.insert(key).second) {
      throw SchemaError("duplicate prediction for " + key.first + "/" + key.second +
                        " in entry " + entry.entry_id);
    }
  }
  for (const std::string& scene_id : coverage.scene_ids) {
    for (const std::string& listener_id : coverage.listener_ids) {
      if (!seen.count({scene_id, listener_id})) {
        throw IncompleteEntryError("entry " + entry.entry_id + " is missing a prediction for " +
                                   scene_id + "/" + listener_id);
      }
    }
  }
}

}  // namespace

Entry ingest_entry(const Entry& entry, const CoverageSpec& coverage) {
  if (entry.kind == EntryKind::enhancement) {
    validate_enhancement_payload(entry, coverage);
  } else {
    validate_prediction_payload(entry, coverage);
  }
  return entry;
}

Entry ingest_entry(const std::filesystem::path& manifest_path, const CoverageSpec& coverage) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open entry manifest " + manifest_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("entry manifest is not valid JSON: ") + e.what());
  }
  Entry e = entry_from_json(j);
  if (e.payload_path.is_relative()) {
    e.payload_path = manifest_path.parent_path() / e.payload_path;
  }
  return ingest_entry(e, coverage);
}

EnhancedOutput load_enhanced(const Entry& entry, const std::string& scene_id,
                             const std::string& listener_id) {
  const std::filesystem::path p = entry.payload_path / enhanced_wav_name(scene_id, listener_id);
  if (!std::filesystem::exists(p)) {
    throw NotFoundError("no enhanced signal for " + scene_id + "/" + listener_id);
  }
  wav::WavData w = wav::read(p);
  if (w.channels.size() != 2) throw SchemaError("enhanced signal is not stereo: " + p.string());
  EnhancedOutput out;
  out.scene_id = scene_id;
  out.listener_id = listener_id;
  out.sample_rate = w.sample_rate;
  out.left = std::move(w.channels[0]);
  out.right = std::move(w.channels[1]);
  return out;
}

std::map<std::pair<std::string, std::string>, double> load_predictions(const Entry& entry) {
  csv::Table table = csv::read(entry.payload_path);
  const int c_scene = table.column("scene_id");
  const int c_listener = table.column("listener_id");
  const int c_score = table.column("score");
  if (c_scene < 0 || c_listener < 0 || c_score < 0) {
    throw SchemaError("prediction CSV must have columns scene_id, listener_id, score");
  }
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& row : table.rows) {
    out[{row[static_cast<std::size_t>(c_scene)], row[static_cast<std::size_t>(c_listener)]}] =
        std::stod(row[static_cast<std::size_t>(c_score)]);
  }
  return out;
}

void EntryStore::add(const Entry& entry) {
  for (const Entry& e : entries_) {
    if (e.entry_id == entry.entry_id) {
      throw ValidationError("duplicate entry_id: " + entry.entry_id);
    }
  }
  entries_.push_back(entry);
}

const Entry& EntryStore::get(const std::string& entry_id) const {
  for (const Entry& e : entries_) {
    if (e.entry_id == entry_id) return e;
  }
  throw NotFoundError("no entry with id " + entry_id);
}

}  // namespace spinsim
