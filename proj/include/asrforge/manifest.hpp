#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "asrforge/error.hpp"
#include "asrforge/normalize.hpp"

namespace asrforge {

enum class Split { pretrain, train, valid, test };

inline std::string_view to_string(Split split) {
  switch (split) {
    case Split::pretrain: return "pretrain";
    case Split::train:    return "train";
    case Split::valid:    return "valid";
    case Split::test:     return "test";
  }
  return "unknown";
}

inline Split parse_split(std::string_view s) {
  if (s == "pretrain") return Split::pretrain;
  if (s == "train") return Split::train;
  if (s == "valid") return Split::valid;
  if (s == "test") return Split::test;
  throw Error(ErrorCode::MalformedFile, "unknown split tag: " + std::string(s));
}

// One manifest row: an audio chunk with duration, language, dataset tag,
// split, and (for labeled splits) a transcript.
struct UtteranceRecord {
  std::string id;
  std::string audio_path;
  double duration_s = 0.0;
  Lang lang = Lang::persian;
  std::string dataset;
  Split split = Split::pretrain;
  std::optional<std::string> transcript;
  std::optional<std::string> source_url;

  void validate() const {
    if (id.empty()) throw Error(ErrorCode::MalformedFile, "record with empty id");
    if (!(duration_s > 0.0))
      throw Error(ErrorCode::MalformedFile, "record " + id + " has non-positive duration");
    const bool labeled = split != Split::pretrain;
    if (labeled && !transcript.has_value())
      throw Error(ErrorCode::MissingTranscript,
                  "record " + id + " in split " + std::string(to_string(split)) +
                      " has no transcript");
    if (!labeled && transcript.has_value())
      throw Error(ErrorCode::MalformedFile,
                  "pretrain record " + id + " must not carry a transcript");
  }
};

inline nlohmann::ordered_json to_json(const UtteranceRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["audio_path"] = r.audio_path;
  j["duration_s"] = r.duration_s;
  j["lang"] = std::string(to_string(r.lang));
  j["dataset"] = r.dataset;
  j["split"] = std::string(to_string(r.split));
  if (r.transcript) j["transcript"] = *r.transcript;
  if (r.source_url) j["source_url"] = *r.source_url;
  return j;
}

inline UtteranceRecord record_from_json(const nlohmann::json& j) {
  UtteranceRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.audio_path = j.at("audio_path").get<std::string>();
    r.duration_s = j.at("duration_s").get<double>();
    r.lang = parse_lang(j.at("lang").get<std::string>());
    r.dataset = j.at("dataset").get<std::string>();
    r.split = parse_split(j.at("split").get<std::string>());
    if (j.contains("transcript")) r.transcript = j.at("transcript").get<std::string>();
    if (j.contains("source_url")) r.source_url = j.at("source_url").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("bad manifest record: ") + e.what());
  }
  r.validate();
  return r;
}

struct Manifest {
  std::vector<UtteranceRecord> records;

  void validate() const {
    std::set<std::string> ids;
    for (const auto& r : records) {
      r.validate();
      if (!ids.insert(r.id).second)
        throw Error(ErrorCode::MalformedFile, "duplicate record id: " + r.id);
    }
  }

  void sort_by_id() {
    std::sort(records.begin(), records.end(),
              [](const UtteranceRecord& a, const UtteranceRecord& b) { return a.id < b.id; });
  }
};

inline void save_manifest(const Manifest& manifest, const std::string& path) {
  manifest.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open for write: " + path);
  for (const auto& r : manifest.records) out << to_json(r).dump() << "\n";
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

inline Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  Manifest manifest;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedFile,
                  path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    manifest.records.push_back(record_from_json(j));
  }
  manifest.validate();
  return manifest;
}

}  // namespace asrforge
