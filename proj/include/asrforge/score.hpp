#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "asrforge/edit_distance.hpp"
#include "asrforge/error.hpp"
#include "asrforge/manifest.hpp"
#include "asrforge/normalize.hpp"
#include "asrforge/parallel.hpp"

namespace asrforge {

// Error-rate report per (lang, dataset), pooled over the corpus: WER uses
// total errors over total reference words, not a mean of per-utterance
// rates.
struct EvalReport {
  struct Bucket {
    long substitutions = 0;
    long insertions = 0;
    long deletions = 0;
    long ref_words = 0;
    long char_errors = 0;
    long ref_chars = 0;
    long utterances = 0;

    double wer() const {
      const long errors = substitutions + insertions + deletions;
      return ref_words == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(ref_words);
    }
    double cer() const {
      return ref_chars == 0 ? 0.0 : static_cast<double>(char_errors) / static_cast<double>(ref_chars);
    }
  };

  std::string mode;  // tokenization mode tag: "char" or "subword"
  std::map<std::pair<std::string, std::string>, Bucket> buckets;  // (lang, dataset)

  Bucket total() const {
    Bucket t;
    for (const auto& [key, b] : buckets) {
      t.substitutions += b.substitutions;
      t.insertions += b.insertions;
      t.deletions += b.deletions;
      t.ref_words += b.ref_words;
      t.char_errors += b.char_errors;
      t.ref_chars += b.ref_chars;
      t.utterances += b.utterances;
    }
    return t;
  }
};

// Hypotheses file: one "id<TAB>text" per line.
inline std::map<std::string, std::string> load_hypotheses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::map<std::string, std::string> hyps;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(ErrorCode::MalformedFile,
                  path + ":" + std::to_string(lineno) + ": expected id<TAB>text");
    hyps[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return hyps;
}

inline std::vector<std::string> split_into_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream is(text);
  std::string w;
  while (is >> w) words.push_back(w);
  return words;
}

// Scores every transcript-bearing record in the manifest against the
// hypotheses map. Both sides are normalized with the same profile before
// tokenization.
inline EvalReport score(const Manifest& manifest,
                        const std::map<std::string, std::string>& hypotheses,
                        const LangProfile& profile, const std::string& mode,
                        int jobs = 1) {
  std::vector<const UtteranceRecord*> records;
  for (const auto& r : manifest.records) {
    if (!r.transcript) continue;
    if (r.lang != profile.lang)
      throw Error(ErrorCode::LangProfileMismatch,
                  "record " + r.id + " is " + std::string(to_string(r.lang)) +
                      " but scoring profile is " + std::string(to_string(profile.lang)));
    if (!hypotheses.count(r.id))
      throw Error(ErrorCode::MissingHypothesis, "no hypothesis for record " + r.id);
    records.push_back(&r);
  }

  struct UttResult {
    EditCounts words;
    EditCounts chars;
    long ref_words = 0;
    long ref_chars = 0;
  };
  std::vector<UttResult> results(records.size());

  parallel_for(records.size(), jobs, [&](std::size_t i) {
    const auto& r = *records[i];
    const std::string ref = normalize(*r.transcript, profile);
    const std::string hyp = normalize(hypotheses.at(r.id), profile);

    const auto ref_words = split_into_words(ref);
    const auto hyp_words = split_into_words(hyp);
    const auto ref_chars = char_tokenize(ref);
    const auto hyp_chars = char_tokenize(hyp);

    results[i].words = edit_distance(ref_words, hyp_words);
    results[i].chars = edit_distance(ref_chars, hyp_chars);
    results[i].ref_words = static_cast<long>(ref_words.size());
    results[i].ref_chars = static_cast<long>(ref_chars.size());
  });

  EvalReport report;
  report.mode = mode;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& b = report.buckets[{std::string(to_string(records[i]->lang)), records[i]->dataset}];
    b.substitutions += results[i].words.substitutions;
    b.insertions += results[i].words.insertions;
    b.deletions += results[i].words.deletions;
    b.ref_words += results[i].ref_words;
    b.char_errors += results[i].chars.distance;
    b.ref_chars += results[i].ref_chars;
    b.utterances += 1;
  }
  return report;
}

inline std::string render_report(const EvalReport& report) {
  std::ostringstream os;
  os << "mode: " << report.mode << "\n";
  os << "lang      dataset              utts     WER%     CER%      S      I      D\n";
  char buf[160];
  auto row = [&](const std::string& lang, const std::string& dataset,
                 const EvalReport::Bucket& b) {
    std::snprintf(buf, sizeof(buf), "%-9s %-18s %6ld  %7.2f  %7.2f  %5ld  %5ld  %5ld\n",
                  lang.c_str(), dataset.c_str(), b.utterances, 100.0 * b.wer(),
                  100.0 * b.cer(), b.substitutions, b.insertions, b.deletions);
    os << buf;
  };
  for (const auto& [key, b] : report.buckets) row(key.first, key.second, b);
  row("all", "(pooled)", report.total());
  return os.str();
}

inline std::string render_report_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "mode,lang,dataset,utterances,wer,cer,substitutions,insertions,deletions,ref_words\n";
  char buf[64];
  auto row = [&](const std::string& lang, const std::string& dataset,
                 const EvalReport::Bucket& b) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", b.wer(), b.cer());
    os << report.mode << "," << lang << "," << dataset << "," << b.utterances << "," << buf
       << "," << b.substitutions << "," << b.insertions << "," << b.deletions << ","
       << b.ref_words << "\n";
  };
  for (const auto& [key, b] : report.buckets) row(key.first, key.second, b);
  row("all", "(pooled)", report.total());
  return os.str();
}

// Side-by-side table for tokenization-mode comparisons: one row per report,
// one WER column per language.
inline std::string render_comparison(const std::vector<EvalReport>& reports) {
  const std::vector<Lang> langs = {Lang::urdu, Lang::persian, Lang::arabic};
  std::ostringstream os;
  os << "Model                      Urdu   Persian    Arabic\n";
  char buf[64];
  for (const auto& report : reports) {
    std::snprintf(buf, sizeof(buf), "%-22s", report.mode.c_str());
    os << buf;
    for (Lang lang : langs) {
      EvalReport::Bucket pooled;
      for (const auto& [key, b] : report.buckets) {
        if (key.first != to_string(lang)) continue;
        pooled.substitutions += b.substitutions;
        pooled.insertions += b.insertions;
        pooled.deletions += b.deletions;
        pooled.ref_words += b.ref_words;
      }
      if (pooled.ref_words == 0) {
        os << "         -";
      } else {
        std::snprintf(buf, sizeof(buf), "%10.1f", 100.0 * pooled.wer());
        os << buf;
      }
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace asrforge
