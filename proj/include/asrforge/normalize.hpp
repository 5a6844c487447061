#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "asrforge/error.hpp"
#include "asrforge/unicode.hpp"

namespace asrforge {

enum class Lang { urdu, persian, arabic };

inline std::string_view to_string(Lang lang) {
  switch (lang) {
    case Lang::urdu:    return "urdu";
    case Lang::persian: return "persian";
    case Lang::arabic:  return "arabic";
  }
  return "unknown";
}

inline Lang parse_lang(std::string_view s) {
  if (s == "urdu") return Lang::urdu;
  if (s == "persian") return Lang::persian;
  if (s == "arabic") return Lang::arabic;
  throw Error(ErrorCode::MalformedFile, "unknown language tag: " + std::string(s));
}

inline constexpr std::string_view kWordBoundarySymbol = "<wb>";

// Normalization rules for one language: a character fold table plus the
// ZWNJ policy. The fold table must be idempotent (no image character is
// also a key).
struct LangProfile {
  Lang lang = Lang::persian;
  bool keep_zwnj = true;
  std::map<char32_t, char32_t> fold;

  void validate() const {
    for (const auto& [src, dst] : fold) {
      if (fold.count(dst))
        throw Error(ErrorCode::MalformedFile,
                    "fold table not idempotent: image U+" + hex(dst) + " is also a key");
      if (src == dst)
        throw Error(ErrorCode::MalformedFile, "fold maps U+" + hex(src) + " to itself");
    }
  }

  static LangProfile for_lang(Lang lang) {
    LangProfile p;
    p.lang = lang;
    switch (lang) {
      case Lang::persian:
      case Lang::urdu:
        p.keep_zwnj = true;
        p.fold = {
            {0x064A, 0x06CC},  // Arabic yeh -> Farsi yeh
            {0x0649, 0x06CC},  // alef maksura -> Farsi yeh
            {0x0643, 0x06A9},  // Arabic kaf -> keheh
            {0x0629, 0x0647},  // teh marbuta -> heh
        };
        break;
      case Lang::arabic:
        p.keep_zwnj = false;
        p.fold = {
            {0x06CC, 0x064A},  // Farsi yeh -> Arabic yeh
            {0x06A9, 0x0643},  // keheh -> Arabic kaf
            {0x0622, 0x0627},  // alef madda -> alef
            {0x0623, 0x0627},  // alef hamza above -> alef
            {0x0625, 0x0627},  // alef hamza below -> alef
        };
        break;
    }
    p.validate();
    return p;
  }

  // Replaces the fold rules with the contents of a data file
  // (one "SRC<TAB>DST" pair of hex codepoints per line, '#' comments).
  static LangProfile with_fold_table_file(Lang lang, const std::string& path) {
    LangProfile p = for_lang(lang);
    p.fold = load_fold_table(path);
    p.validate();
    return p;
  }

  static std::map<char32_t, char32_t> load_fold_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
    std::map<char32_t, char32_t> fold;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw Error(ErrorCode::MalformedFile,
                    path + ":" + std::to_string(lineno) + ": expected SRC<TAB>DST");
      try {
        const char32_t src = static_cast<char32_t>(std::stoul(line.substr(0, tab), nullptr, 16));
        const char32_t dst = static_cast<char32_t>(std::stoul(line.substr(tab + 1), nullptr, 16));
        fold[src] = dst;
      } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedFile,
                    path + ":" + std::to_string(lineno) + ": bad hex codepoint");
      }
    }
    return fold;
  }

  void save_fold_table(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open for write: " + path);
    out << "# fold table for " << to_string(lang) << " (SRC<TAB>DST hex codepoints)\n";
    for (const auto& [src, dst] : fold) out << hex(src) << "\t" << hex(dst) << "\n";
  }

 private:
  static std::string hex(char32_t cp) {
    std::ostringstream os;
    os << std::hex << std::uppercase << static_cast<std::uint32_t>(cp);
    std::string s = os.str();
    while (s.size() < 4) s.insert(s.begin(), '0');
    return s;
  }
};

namespace detail {

// Harakat and related marks removed in every profile; ZWNJ is handled by
// the profile policy.
inline bool in_strip_set(char32_t cp) {
  if (cp >= 0x064B && cp <= 0x065F) return true;  // harakat, madda, hamza marks
  if (cp == 0x0670) return true;                  // superscript alef
  if (cp == 0x0640) return true;                  // tatweel
  if (cp >= 0x0610 && cp <= 0x061A) return true;  // honorific marks
  if (cp >= 0x06D6 && cp <= 0x06DC) return true;  // Quranic annotation
  if (cp >= 0x06DF && cp <= 0x06E4) return true;
  if (cp == 0x06E7 || cp == 0x06E8) return true;
  if (cp >= 0x06EA && cp <= 0x06ED) return true;
  return uni::is_format_control(cp);
}

inline bool map_digit(char32_t cp, char32_t& out) {
  if (cp >= 0x0660 && cp <= 0x0669) {  // Arabic-Indic digits
    out = U'0' + (cp - 0x0660);
    return true;
  }
  if (cp >= 0x06F0 && cp <= 0x06F9) {  // extended (Persian/Urdu) digits
    out = U'0' + (cp - 0x06F0);
    return true;
  }
  return false;
}

}  // namespace detail

// Canonical transcript form: compose Arabic-script combining sequences,
// strip harakat/controls, apply the profile fold table, map eastern digits
// to ASCII, drop punctuation, collapse whitespace. Idempotent.
inline std::string normalize(std::string_view text, const LangProfile& profile) {
  const std::u32string composed = uni::compose_arabic(uni::decode_utf8(text));

  std::u32string kept;
  kept.reserve(composed.size());
  for (char32_t cp : composed) {
    if (detail::in_strip_set(cp)) continue;
    if (cp == uni::kZwj) continue;
    if (cp == uni::kZwnj && !profile.keep_zwnj) continue;

    const auto it = profile.fold.find(cp);
    if (it != profile.fold.end()) cp = it->second;
    cp = uni::to_lower(cp);

    char32_t digit;
    if (detail::map_digit(cp, digit)) cp = digit;

    if (uni::is_punctuation(cp)) continue;
    if (uni::is_whitespace(cp)) cp = U' ';
    kept.push_back(cp);
  }

  // Collapse whitespace runs, trim, and drop ZWNJ at word boundaries where
  // it carries no orthographic meaning.
  std::u32string out;
  out.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const char32_t cp = kept[i];
    if (cp == U' ') {
      if (out.empty() || out.back() == U' ') continue;
      out.push_back(U' ');
      continue;
    }
    if (cp == uni::kZwnj) {
      const bool joined_left = !out.empty() && out.back() != U' ' && out.back() != uni::kZwnj;
      const bool joined_right = i + 1 < kept.size() && kept[i + 1] != U' ' && kept[i + 1] != uni::kZwnj;
      if (!joined_left || !joined_right) continue;
    }
    out.push_back(cp);
  }
  while (!out.empty() && out.back() == U' ') out.pop_back();

  return uni::encode_utf8(out);
}

// Splits normalized text into one symbol per extended grapheme cluster;
// spaces become the word-boundary symbol. Combining marks and ZWNJ/ZWJ
// extend the preceding cluster.
inline std::vector<std::string> char_tokenize(std::string_view text) {
  const std::u32string cps = uni::decode_utf8(text);
  std::vector<std::string> symbols;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      symbols.push_back(current);
      current.clear();
    }
  };
  for (char32_t cp : cps) {
    if (cp == U' ') {
      flush();
      symbols.emplace_back(kWordBoundarySymbol);
      continue;
    }
    const bool extends = uni::is_combining_mark(cp) || cp == uni::kZwnj || cp == uni::kZwj;
    if (!extends) flush();
    uni::append_utf8(current, cp);
  }
  flush();
  return symbols;
}

}  // namespace asrforge
