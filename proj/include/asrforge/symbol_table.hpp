#pragma once

#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "asrforge/error.hpp"

namespace asrforge {

// Output symbol inventory for the CTC layer. Index 0 is the blank, 1 the
// word boundary, 2 the unknown piece; payload symbols start at 3.
class CtcSymbolTable {
 public:
  static constexpr int kBlankIndex = 0;
  static constexpr int kWordBoundaryIndex = 1;
  static constexpr int kUnkIndex = 2;
  static constexpr int kFirstPieceIndex = 3;

  CtcSymbolTable() { set_symbols({}); }

  explicit CtcSymbolTable(const std::vector<std::string>& pieces) { set_symbols(pieces); }

  int size() const { return static_cast<int>(symbols_.size()); }

  const std::string& symbol(int index) const {
    if (index < 0 || index >= size())
      throw Error(ErrorCode::InvalidIndex,
                  "symbol index " + std::to_string(index) + " outside table of size " +
                      std::to_string(size()));
    return symbols_[static_cast<std::size_t>(index)];
  }

  const std::vector<std::string>& symbols() const { return symbols_; }

  // Index of a payload symbol, or kUnkIndex when unknown.
  int index_of(const std::string& symbol) const {
    const auto it = index_.find(symbol);
    return it == index_.end() ? kUnkIndex : it->second;
  }

  bool contains(const std::string& symbol) const { return index_.count(symbol) > 0; }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open for write: " + path);
    for (const auto& s : symbols_) out << s << "\n";
    if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path);
  }

  static CtcSymbolTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    if (lines.size() < 3 || lines[0] != "<blank>" || lines[1] != "<wb>" || lines[2] != "<unk>")
      throw Error(ErrorCode::MalformedFile, "symbol table must start with <blank>, <wb>, <unk>: " + path);
    CtcSymbolTable table;
    table.set_symbols({lines.begin() + 3, lines.end()});
    return table;
  }

 private:
  void set_symbols(const std::vector<std::string>& pieces) {
    symbols_ = {"<blank>", "<wb>", "<unk>"};
    symbols_.insert(symbols_.end(), pieces.begin(), pieces.end());
    index_.clear();
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (index_.count(symbols_[i]))
        throw Error(ErrorCode::MalformedFile, "duplicate symbol: " + symbols_[i]);
      index_[symbols_[i]] = static_cast<int>(i);
    }
  }

  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace asrforge
