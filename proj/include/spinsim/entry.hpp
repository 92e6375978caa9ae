#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "spinsim/enhancer.hpp"
#include "spinsim/scene_spec.hpp"

namespace spinsim {

enum class EntryKind { enhancement, prediction };

const char* entry_kind_name(EntryKind k);
EntryKind parse_entry_kind(const std::string& name);

struct EntryMetadata {
  std::string system_description_path;  // document slot; content is not validated
  bool external_data_declared = false;
  bool anonymous = false;               // anonymous entries are not prize-eligible
  std::string processor_cmd;            // declared processor, probed for causality
};

struct Entry {
  std::string entry_id;
  std::string team_id;
  EntryKind kind = EntryKind::enhancement;
  std::filesystem::path payload_path;  // WAV directory or score CSV
  EntryMetadata metadata;
};

nlohmann::json entry_to_json(const Entry& e);
Entry entry_from_json(const nlohmann::json& j);

// The coverage an entry payload must provide: every (scene, listener) pair.
struct CoverageSpec {
  std::vector<std::string> scene_ids;
  std::vector<std::string> listener_ids;
  double sample_rate = 44100.0;
};

std::string enhanced_wav_name(const std::string& scene_id, const std::string& listener_id);

// Validates the payload behind `entry` against the coverage spec.
// Enhancement payloads must hold one stereo WAV per (scene, listener) at the
// dataset rate; prediction payloads a scene_id,listener_id,score CSV with
// scores in [0, 1]. Returns the entry unchanged on success.
Entry ingest_entry(const Entry& entry, const CoverageSpec& coverage);

// Reads `path` as an entry manifest (JSON), resolves the payload path
// relative to the manifest directory, then validates as above.
Entry ingest_entry(const std::filesystem::path& manifest_path, const CoverageSpec& coverage);

// Loads one enhanced signal from a validated enhancement entry.
EnhancedOutput load_enhanced(const Entry& entry, const std::string& scene_id,
                             const std::string& listener_id);

// Loads a validated prediction payload as (scene_id, listener_id) -> score.
std::map<std::pair<std::string, std::string>, double> load_predictions(const Entry& entry);

// Registered entries, unique by entry_id.
class EntryStore {
public:
  void add(const Entry& entry);
  const Entry& get(const std::string& entry_id) const;
  const std::vector<Entry>& entries() const { return entries_; }

private:
  std::vector<Entry> entries_;
};

}  // namespace spinsim
