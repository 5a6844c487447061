#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "asrforge/error.hpp"
#include "asrforge/manifest.hpp"
#include "asrforge/parallel.hpp"
#include "asrforge/resample.hpp"
#include "asrforge/vad.hpp"
#include "asrforge/wav.hpp"

namespace asrforge {

namespace detail {

// Content digest of the canonical-rate PCM16 sample bytes (FNV-1a), so the
// same recording ingested at different source rates deduplicates.
inline std::uint64_t audio_digest(const AudioBuffer& canonical) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](unsigned char byte) {
    h ^= byte;
    h *= 1099511628211ull;
  };
  for (float x : canonical.samples) {
    long q = std::lround(static_cast<double>(x) * 32768.0);
    q = std::max(-32768L, std::min(32767L, q));
    const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(q));
    mix(static_cast<unsigned char>(u & 0xff));
    mix(static_cast<unsigned char>(u >> 8));
  }
  return h;
}

inline std::string path_stem(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

}  // namespace detail

struct IngestOptions {
  Lang lang = Lang::persian;
  std::string dataset;
  Split split = Split::pretrain;  // labeled splits require transcript sidecars
  int jobs = 1;
};

struct IngestResult {
  Manifest manifest;
  int duplicates_dropped = 0;
};

// Expands an input spec into audio paths: a directory is scanned for .wav
// files, anything else is read as a listing file with one path per line.
inline std::vector<std::string> collect_audio_paths(const std::string& input) {
  namespace fs = std::filesystem;
  std::vector<std::string> paths;
  if (fs::is_directory(input)) {
    for (const auto& entry : fs::directory_iterator(input))
      if (entry.is_regular_file() && entry.path().extension() == ".wav")
        paths.push_back(entry.path().string());
  } else if (fs::is_regular_file(input)) {
    std::ifstream in(input);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) paths.push_back(line);
  } else {
    throw Error(ErrorCode::IoFailure, "input not found: " + input);
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

// Builds one manifest record per readable audio file: duration measured at
// the canonical rate, transcript sidecars (<name>.txt) normalized with the
// language profile, duplicate recordings dropped by content digest.
inline IngestResult ingest(const std::vector<std::string>& audio_paths,
                           const IngestOptions& opts, const LangProfile& profile) {
  struct FileInfo {
    double duration_s = 0.0;
    std::uint64_t digest = 0;
    std::optional<std::string> transcript;
  };
  const bool labeled = opts.split != Split::pretrain;
  std::vector<FileInfo> infos(audio_paths.size());

  parallel_for(audio_paths.size(), opts.jobs, [&](std::size_t i) {
    const std::string& path = audio_paths[i];
    AudioBuffer canonical;
    try {
      canonical = resample_to_16k(read_wav(path));
    } catch (const Error& e) {
      throw Error(ErrorCode::UnreadableAudio, path + " (" + e.what() + ")");
    }
    infos[i].duration_s = canonical.duration_s();
    infos[i].digest = detail::audio_digest(canonical);
    if (labeled) {
      const auto sidecar = std::filesystem::path(path).replace_extension(".txt");
      std::ifstream ts(sidecar);
      if (!ts)
        throw Error(ErrorCode::MissingTranscript,
                    "no transcript sidecar for " + path + " (expected " + sidecar.string() + ")");
      std::stringstream ss;
      ss << ts.rdbuf();
      infos[i].transcript = normalize(ss.str(), profile);
    }
  });

  IngestResult result;
  std::map<std::uint64_t, std::string> seen;
  std::map<std::string, int> used_ids;
  for (std::size_t i = 0; i < audio_paths.size(); ++i) {
    if (seen.count(infos[i].digest)) {
      ++result.duplicates_dropped;
      continue;
    }
    seen[infos[i].digest] = audio_paths[i];

    std::string id = detail::path_stem(audio_paths[i]);
    const int n = ++used_ids[id];
    if (n > 1) id += "_" + std::to_string(n);

    UtteranceRecord r;
    r.id = id;
    r.audio_path = audio_paths[i];
    r.duration_s = infos[i].duration_s;
    r.lang = opts.lang;
    r.dataset = opts.dataset;
    r.split = opts.split;
    r.transcript = infos[i].transcript;
    result.manifest.records.push_back(std::move(r));
  }
  result.manifest.sort_by_id();
  result.manifest.validate();
  return result;
}

// Requested share of each split, either as ratios of total hours or as
// absolute hour targets.
struct SplitSpec {
  std::map<Split, double> targets;
  bool targets_are_hours = false;

  void validate() const {
    if (targets.empty())
      throw Error(ErrorCode::InsufficientData, "no split targets given");
    double total = 0.0;
    for (const auto& [split, v] : targets) {
      if (split == Split::pretrain)
        throw Error(ErrorCode::MalformedFile, "cannot split into pretrain");
      if (v < 0.0) throw Error(ErrorCode::MalformedFile, "negative split target");
      total += v;
    }
    if (total <= 0.0) throw Error(ErrorCode::MalformedFile, "split targets sum to zero");
  }
};

// Deterministic stratified split: within each (lang, dataset) group,
// utterances are shuffled by the seed, stably ordered by descending
// duration, and assigned greedily to the split with the largest remaining
// hour deficit. Hour totals land within one utterance of target.
inline Manifest split_manifest(const Manifest& manifest, const SplitSpec& spec,
                               std::uint64_t seed) {
  spec.validate();

  std::vector<Split> split_order;
  for (Split s : {Split::train, Split::valid, Split::test})
    if (spec.targets.count(s)) split_order.push_back(s);

  Manifest out = manifest;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    const auto& r = out.records[i];
    if (r.split == Split::pretrain) continue;  // unlabeled data passes through
    groups[{std::string(to_string(r.lang)), r.dataset}].push_back(i);
  }

  for (auto& [key, members] : groups) {
    // Group-local engine so results do not depend on group iteration order.
    std::uint64_t group_seed = seed;
    for (char c : key.first + "\x1f" + key.second)
      group_seed = group_seed * 1099511628211ull + static_cast<unsigned char>(c);
    std::mt19937_64 rng(group_seed);

    // Fisher-Yates, spelled out so the assignment is identical across
    // standard library implementations.
    for (std::size_t i = members.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(members[i - 1], members[j]);
    }
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return out.records[a].duration_s > out.records[b].duration_s;
    });

    double group_hours = 0.0;
    for (std::size_t i : members) group_hours += out.records[i].duration_s / 3600.0;

    std::map<Split, double> deficit;
    double ratio_total = 0.0;
    if (!spec.targets_are_hours)
      for (const auto& [s, v] : spec.targets) ratio_total += v;
    for (const auto& [s, v] : spec.targets)
      deficit[s] = spec.targets_are_hours ? v : group_hours * (v / ratio_total);

    std::map<Split, int> assigned_count;
    for (std::size_t i : members) {
      Split best = split_order.front();
      for (Split s : split_order)
        if (deficit[s] > deficit[best]) best = s;
      out.records[i].split = best;
      deficit[best] -= out.records[i].duration_s / 3600.0;
      ++assigned_count[best];
    }

    for (Split s : split_order) {
      if (spec.targets.at(s) > 0.0 && assigned_count[s] == 0)
        throw Error(ErrorCode::InsufficientData,
                    "dataset " + key.second + " (" + key.first + ") too small to fill split " +
                        std::string(to_string(s)));
    }
  }
  out.validate();
  return out;
}

// Aggregated hours and utterance counts per (lang, dataset, split).
struct CorpusStats {
  struct Bucket {
    double hours = 0.0;
    long utterances = 0;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Bucket> buckets;

  Bucket lang_split_total(Lang lang, Split split) const {
    Bucket total;
    for (const auto& [key, b] : buckets) {
      if (std::get<0>(key) == to_string(lang) && std::get<2>(key) == to_string(split)) {
        total.hours += b.hours;
        total.utterances += b.utterances;
      }
    }
    return total;
  }
};

inline CorpusStats stats(const Manifest& manifest) {
  CorpusStats s;
  for (const auto& r : manifest.records) {
    auto& b = s.buckets[{std::string(to_string(r.lang)), r.dataset,
                         std::string(to_string(r.split))}];
    b.hours += r.duration_s / 3600.0;
    b.utterances += 1;
  }
  return s;
}

// Per-language overview in the layout of the corpus summary table:
// language rows, hour columns for each split.
inline std::string render_overview(const CorpusStats& s) {
  std::ostringstream os;
  os << "Language   Pretraining      Train Set      Valid Set       Test Set\n";
  for (Lang lang : {Lang::urdu, Lang::persian, Lang::arabic}) {
    bool any = false;
    for (const auto& [key, b] : s.buckets)
      if (std::get<0>(key) == to_string(lang)) any = true;
    if (!any) continue;
    os << to_string(lang);
    for (std::size_t pad = to_string(lang).size(); pad < 8; ++pad) os << ' ';
    for (Split split : {Split::pretrain, Split::train, Split::valid, Split::test}) {
      const auto b = s.lang_split_total(lang, split);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%11.2f hrs", b.hours);
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

inline std::string render_stats_csv(const CorpusStats& s) {
  std::ostringstream os;
  os << "lang,dataset,split,hours,utterances\n";
  for (const auto& [key, b] : s.buckets) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", b.hours);
    os << std::get<0>(key) << "," << std::get<1>(key) << "," << std::get<2>(key) << ","
       << buf << "," << b.utterances << "\n";
  }
  return os.str();
}

}  // namespace asrforge
