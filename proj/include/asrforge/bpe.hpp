#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "asrforge/error.hpp"
#include "asrforge/normalize.hpp"
#include "asrforge/symbol_table.hpp"
#include "asrforge/unicode.hpp"

namespace asrforge {

// Byte-pair-encoding subword model. Merges are learned within words only;
// encoding a word replays the merges in learned order, so two trainings on
// the same corpus are byte-identical.
class BpeModel {
 public:
  static constexpr int kReservedSymbols = 3;  // blank, word boundary, unk

  BpeModel() = default;

  Lang lang() const { return lang_; }
  int vocab_size_target() const { return vocab_size_target_; }
  const std::vector<std::string>& base_symbols() const { return base_symbols_; }
  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }
  const std::vector<std::string>& pieces() const { return pieces_; }
  const CtcSymbolTable& symbol_table() const { return table_; }

  static BpeModel train(const std::vector<std::string>& corpus, int vocab_size,
                        Lang lang = Lang::persian);

  std::vector<int> encode_word(const std::string& word) const;
  std::vector<int> encode_sentence(const std::string& sentence) const;
  std::string decode_pieces(const std::vector<int>& indices, long* unk_count = nullptr) const;

  void save(const std::string& path) const;
  static BpeModel load(const std::string& path);

 private:
  void finalize();

  Lang lang_ = Lang::persian;
  int vocab_size_target_ = 512;
  std::vector<std::string> base_symbols_;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::vector<std::string> pieces_;
  CtcSymbolTable table_;
  std::unordered_map<std::string, int> piece_to_table_index_;
};

namespace detail {

inline std::vector<std::string> split_codepoints(std::string_view word) {
  std::vector<std::string> symbols;
  for (char32_t cp : uni::decode_utf8(word)) {
    std::string s;
    uni::append_utf8(s, cp);
    symbols.push_back(std::move(s));
  }
  return symbols;
}

inline std::vector<std::string> split_words(std::string_view sentence) {
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos < sentence.size()) {
    const std::size_t space = sentence.find(' ', pos);
    const std::size_t end = (space == std::string_view::npos) ? sentence.size() : space;
    if (end > pos) words.emplace_back(sentence.substr(pos, end - pos));
    pos = end + 1;
  }
  return words;
}

// Replaces adjacent (left, right) symbol pairs by their concatenation,
// scanning left to right.
inline void apply_merge(std::vector<std::string>& symbols, const std::string& left,
                        const std::string& right, const std::string& product) {
  std::size_t write = 0;
  for (std::size_t read = 0; read < symbols.size(); ++read) {
    if (read + 1 < symbols.size() && symbols[read] == left && symbols[read + 1] == right) {
      symbols[write++] = product;
      ++read;
    } else {
      if (write != read) symbols[write] = std::move(symbols[read]);
      ++write;
    }
  }
  symbols.resize(write);
}

}  // namespace detail

inline BpeModel BpeModel::train(const std::vector<std::string>& corpus, int vocab_size,
                                Lang lang) {
  // Word frequencies over the space-split corpus; merges never cross words.
  std::map<std::string, long> word_freq;
  for (const auto& sentence : corpus)
    for (auto& word : detail::split_words(sentence)) ++word_freq[word];
  if (word_freq.empty()) throw Error(ErrorCode::EmptyCorpus, "no words in training corpus");

  std::set<std::string> base_set;
  std::vector<std::pair<std::vector<std::string>, long>> words;
  words.reserve(word_freq.size());
  for (const auto& [word, freq] : word_freq) {
    auto symbols = detail::split_codepoints(word);
    for (const auto& s : symbols) base_set.insert(s);
    words.emplace_back(std::move(symbols), freq);
  }

  const int base_count = static_cast<int>(base_set.size());
  if (vocab_size < base_count + kReservedSymbols)
    throw Error(ErrorCode::VocabTooSmall,
                "vocab_size " + std::to_string(vocab_size) + " < " +
                    std::to_string(base_count) + " base symbols + " +
                    std::to_string(kReservedSymbols) + " reserved");

  BpeModel model;
  model.lang_ = lang;
  model.vocab_size_target_ = vocab_size;
  model.base_symbols_.assign(base_set.begin(), base_set.end());
  model.pieces_ = model.base_symbols_;

  std::set<std::string> piece_set(base_set.begin(), base_set.end());
  while (static_cast<int>(model.pieces_.size()) < vocab_size) {
    std::map<std::pair<std::string, std::string>, long> pair_count;
    for (const auto& [symbols, freq] : words)
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i)
        pair_count[{symbols[i], symbols[i + 1]}] += freq;
    if (pair_count.empty()) break;

    // Most frequent pair; the ordered map makes the lexicographically
    // smallest (left, right) win ties.
    auto best = pair_count.begin();
    for (auto it = pair_count.begin(); it != pair_count.end(); ++it)
      if (it->second > best->second) best = it;

    const auto& [left, right] = best->first;
    const std::string product = left + right;
    model.merges_.emplace_back(left, right);
    for (auto& [symbols, freq] : words) detail::apply_merge(symbols, left, right, product);
    if (piece_set.insert(product).second) model.pieces_.push_back(product);
  }

  model.finalize();
  return model;
}

inline void BpeModel::finalize() {
  table_ = CtcSymbolTable(pieces_);
  piece_to_table_index_.clear();
  for (std::size_t i = 0; i < pieces_.size(); ++i)
    piece_to_table_index_[pieces_[i]] = static_cast<int>(i) + CtcSymbolTable::kFirstPieceIndex;
}

inline std::vector<int> BpeModel::encode_word(const std::string& word) const {
  // Characters outside the training alphabet become a sentinel that no
  // merge can touch, and map to <unk>.
  static const std::string kUnkSentinel(1, '\0');
  std::vector<std::string> symbols = detail::split_codepoints(word);
  for (auto& s : symbols)
    if (!piece_to_table_index_.count(s)) s = kUnkSentinel;

  for (const auto& [left, right] : merges_)
    detail::apply_merge(symbols, left, right, left + right);

  std::vector<int> indices;
  indices.reserve(symbols.size());
  for (const auto& s : symbols) {
    if (s == kUnkSentinel) {
      indices.push_back(CtcSymbolTable::kUnkIndex);
    } else {
      const auto it = piece_to_table_index_.find(s);
      indices.push_back(it == piece_to_table_index_.end() ? CtcSymbolTable::kUnkIndex
                                                          : it->second);
    }
  }
  return indices;
}

inline std::vector<int> BpeModel::encode_sentence(const std::string& sentence) const {
  std::vector<int> indices;
  bool first = true;
  for (const auto& word : detail::split_words(sentence)) {
    if (!first) indices.push_back(CtcSymbolTable::kWordBoundaryIndex);
    first = false;
    const auto word_indices = encode_word(word);
    indices.insert(indices.end(), word_indices.begin(), word_indices.end());
  }
  return indices;
}

inline std::string BpeModel::decode_pieces(const std::vector<int>& indices,
                                           long* unk_count) const {
  std::vector<std::string> words(1);
  long unks = 0;
  for (int index : indices) {
    if (index < 0 || index >= table_.size())
      throw Error(ErrorCode::InvalidIndex,
                  "piece index " + std::to_string(index) + " outside symbol table");
    if (index == CtcSymbolTable::kBlankIndex) continue;
    if (index == CtcSymbolTable::kWordBoundaryIndex) {
      words.emplace_back();
      continue;
    }
    if (index == CtcSymbolTable::kUnkIndex) {
      ++unks;  // <unk> decodes to the empty string
      continue;
    }
    words.back() += table_.symbol(index);
  }
  if (unk_count) *unk_count = unks;

  std::string out;
  for (const auto& word : words) {
    if (word.empty()) continue;
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

inline void BpeModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open for write: " + path);
  out << "#bpe v1 lang=" << to_string(lang_) << " vocab=" << vocab_size_target_ << "\n";
  out << "#base\n";
  for (const auto& s : base_symbols_) out << s << "\n";
  out << "#merges\n";
  for (const auto& [left, right] : merges_) out << left << "\t" << right << "\n";
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

inline BpeModel BpeModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::MalformedFile, "empty model file: " + path);

  const std::string prefix = "#bpe v1 lang=";
  const auto vocab_pos = line.find(" vocab=");
  if (line.rfind(prefix, 0) != 0 || vocab_pos == std::string::npos)
    throw Error(ErrorCode::MalformedFile, "bad model header: " + line);

  BpeModel model;
  model.lang_ = parse_lang(line.substr(prefix.size(), vocab_pos - prefix.size()));
  try {
    model.vocab_size_target_ = std::stoi(line.substr(vocab_pos + 7));
  } catch (const std::exception&) {
    throw Error(ErrorCode::MalformedFile, "bad vocab in model header: " + line);
  }

  if (!std::getline(in, line) || line != "#base")
    throw Error(ErrorCode::MalformedFile, "missing #base section in " + path);
  std::set<std::string> piece_set;
  while (std::getline(in, line) && line != "#merges") {
    model.base_symbols_.push_back(line);
    if (!piece_set.insert(line).second)
      throw Error(ErrorCode::MalformedFile, "duplicate base symbol in " + path);
  }
  if (line != "#merges")
    throw Error(ErrorCode::MalformedFile, "missing #merges section in " + path);
  model.pieces_ = model.base_symbols_;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(ErrorCode::MalformedFile, "bad merge line in " + path + ": " + line);
    std::string left = line.substr(0, tab);
    std::string right = line.substr(tab + 1);
    model.merges_.emplace_back(left, right);
    if (piece_set.insert(left + right).second) model.pieces_.push_back(left + right);
  }
  model.finalize();
  return model;
}

// Symbol table in character mode: one symbol per grapheme cluster observed
// in the corpus, for the character-based baseline.
inline CtcSymbolTable build_char_symbol_table(const std::vector<std::string>& corpus) {
  std::set<std::string> chars;
  for (const auto& sentence : corpus)
    for (const auto& symbol : char_tokenize(sentence))
      if (symbol != kWordBoundarySymbol) chars.insert(symbol);
  return CtcSymbolTable({chars.begin(), chars.end()});
}

inline CtcSymbolTable build_symbol_table(const BpeModel& model) {
  return model.symbol_table();
}

}  // namespace asrforge
