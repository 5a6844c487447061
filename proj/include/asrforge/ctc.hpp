#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "asrforge/error.hpp"
#include "asrforge/symbol_table.hpp"

namespace asrforge {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// T x V matrix of per-frame scores over a CTC symbol table. Used both for
// raw logits and for log-probabilities.
struct LogitMatrix {
  int frames = 0;   // T
  int symbols = 0;  // V
  std::vector<double> values;  // row-major

  LogitMatrix() = default;

  LogitMatrix(int t, int v, double fill = 0.0)
      : frames(t), symbols(v), values(static_cast<std::size_t>(t) * v, fill) {
    if (t < 1 || v < 1)
      throw Error(ErrorCode::DimensionMismatch, "logit matrix needs T >= 1 and V >= 1");
  }

  double& at(int t, int v) { return values[static_cast<std::size_t>(t) * symbols + v]; }
  double at(int t, int v) const { return values[static_cast<std::size_t>(t) * symbols + v]; }

  void check_finite() const {
    for (double x : values)
      if (!std::isfinite(x))
        throw Error(ErrorCode::MalformedFile, "non-finite value in logit matrix");
  }
};

// Non-blank CTC labels (pieces and the word boundary).
struct TargetSequence {
  std::vector<int> indices;

  TargetSequence() = default;

  explicit TargetSequence(std::vector<int> idx) : indices(std::move(idx)) {
    for (int i : indices)
      if (i <= 0)
        throw Error(ErrorCode::InvalidIndex,
                    "target may not contain the blank or negative indices");
  }

  std::size_t size() const { return indices.size(); }
};

struct BeamConfig {
  int beam_width = 32;
  double prune_logp_floor = kNegInf;  // frame log-probs below this are not expanded

  void validate() const {
    if (beam_width < 1)
      throw Error(ErrorCode::DimensionMismatch, "beam_width must be >= 1");
  }
};

inline double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// Row-wise log-softmax, stabilized by max subtraction.
inline LogitMatrix log_softmax(const LogitMatrix& logits) {
  logits.check_finite();
  LogitMatrix out(logits.frames, logits.symbols);
  for (int t = 0; t < logits.frames; ++t) {
    double row_max = kNegInf;
    for (int v = 0; v < logits.symbols; ++v) row_max = std::max(row_max, logits.at(t, v));
    double sum = 0.0;
    for (int v = 0; v < logits.symbols; ++v) sum += std::exp(logits.at(t, v) - row_max);
    const double log_z = row_max + std::log(sum);
    for (int v = 0; v < logits.symbols; ++v) out.at(t, v) = logits.at(t, v) - log_z;
  }
  return out;
}

struct CtcResult {
  double loss = 0.0;
  LogitMatrix grad;     // d loss / d logits, including the log-softmax
  bool feasible = true; // false when no alignment of the target fits in T frames
};

// CTC negative log-likelihood of the target under per-frame log-probs,
// via the forward-backward recursions over the blank-extended label
// sequence, everything in log space. The gradient is taken with respect
// to the pre-softmax logits.
inline CtcResult ctc_loss(const LogitMatrix& logp, const TargetSequence& target) {
  const int T = logp.frames;
  const int V = logp.symbols;
  for (int i : target.indices)
    if (i >= V)
      throw Error(ErrorCode::DimensionMismatch,
                  "target index " + std::to_string(i) + " outside vocabulary of size " +
                      std::to_string(V));

  const int L = static_cast<int>(target.size());
  int repeats = 0;
  for (int i = 1; i < L; ++i)
    if (target.indices[i] == target.indices[i - 1]) ++repeats;

  CtcResult result;
  if (L + repeats > T) {
    // No monotonic alignment exists; report infinite loss instead of
    // failing so batch evaluation over mixed-length data can proceed.
    result.loss = std::numeric_limits<double>::infinity();
    result.grad = LogitMatrix(T, V, 0.0);
    result.feasible = false;
    return result;
  }

  // Extended sequence: blanks interleaved around the labels.
  const int S = 2 * L + 1;
  std::vector<int> ext(static_cast<std::size_t>(S), CtcSymbolTable::kBlankIndex);
  for (int i = 0; i < L; ++i) ext[static_cast<std::size_t>(2 * i + 1)] = target.indices[i];

  auto idx = [S](int t, int s) { return static_cast<std::size_t>(t) * S + s; };
  std::vector<double> alpha(static_cast<std::size_t>(T) * S, kNegInf);
  std::vector<double> beta(static_cast<std::size_t>(T) * S, kNegInf);

  alpha[idx(0, 0)] = logp.at(0, ext[0]);
  if (S > 1) alpha[idx(0, 1)] = logp.at(0, ext[1]);
  for (int t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double acc = alpha[idx(t - 1, s)];
      if (s >= 1) acc = log_sum_exp(acc, alpha[idx(t - 1, s - 1)]);
      if (s >= 2 && ext[s] != CtcSymbolTable::kBlankIndex && ext[s] != ext[s - 2])
        acc = log_sum_exp(acc, alpha[idx(t - 1, s - 2)]);
      if (acc != kNegInf) alpha[idx(t, s)] = acc + logp.at(t, ext[s]);
    }
  }

  beta[idx(T - 1, S - 1)] = logp.at(T - 1, ext[S - 1]);
  if (S > 1) beta[idx(T - 1, S - 2)] = logp.at(T - 1, ext[S - 2]);
  for (int t = T - 2; t >= 0; --t) {
    for (int s = S - 1; s >= 0; --s) {
      double acc = beta[idx(t + 1, s)];
      if (s + 1 < S) acc = log_sum_exp(acc, beta[idx(t + 1, s + 1)]);
      if (s + 2 < S && ext[s + 2] != CtcSymbolTable::kBlankIndex && ext[s + 2] != ext[s])
        acc = log_sum_exp(acc, beta[idx(t + 1, s + 2)]);
      if (acc != kNegInf) beta[idx(t, s)] = acc + logp.at(t, ext[s]);
    }
  }

  double log_p = alpha[idx(T - 1, S - 1)];
  if (S > 1) log_p = log_sum_exp(log_p, alpha[idx(T - 1, S - 2)]);

  result.loss = std::max(0.0, -log_p);
  result.grad = LogitMatrix(T, V, 0.0);

  // grad = softmax(logits) - gamma / P, where gamma collects the posterior
  // occupancy of each symbol at each frame. alpha and beta both include the
  // emission at t, hence the double subtraction of logp.
  for (int t = 0; t < T; ++t) {
    std::vector<double> occupancy(static_cast<std::size_t>(V), kNegInf);
    for (int s = 0; s < S; ++s) {
      const double ab = (alpha[idx(t, s)] == kNegInf || beta[idx(t, s)] == kNegInf)
                            ? kNegInf
                            : alpha[idx(t, s)] + beta[idx(t, s)];
      if (ab != kNegInf) {
        auto& slot = occupancy[static_cast<std::size_t>(ext[s])];
        slot = log_sum_exp(slot, ab);
      }
    }
    for (int v = 0; v < V; ++v) {
      const double y = std::exp(logp.at(t, v));
      const double occ = occupancy[static_cast<std::size_t>(v)];
      const double match =
          (occ == kNegInf) ? 0.0 : std::exp(occ - 2.0 * logp.at(t, v) - log_p);
      result.grad.at(t, v) = y - match;
    }
  }
  return result;
}

// Per-frame argmax (ties to the lowest index), collapse repeats, drop blanks.
inline std::vector<int> greedy_decode(const LogitMatrix& logp, const CtcSymbolTable& table) {
  if (logp.symbols != table.size())
    throw Error(ErrorCode::DimensionMismatch,
                "matrix width " + std::to_string(logp.symbols) + " != symbol table size " +
                    std::to_string(table.size()));
  std::vector<int> out;
  int prev = CtcSymbolTable::kBlankIndex;
  for (int t = 0; t < logp.frames; ++t) {
    int best = 0;
    for (int v = 1; v < logp.symbols; ++v)
      if (logp.at(t, v) > logp.at(t, best)) best = v;
    if (best != CtcSymbolTable::kBlankIndex && best != prev) out.push_back(best);
    prev = best;
  }
  return out;
}

struct ScoredLabeling {
  std::vector<int> labels;
  double log_prob = kNegInf;
};

// CTC prefix beam search. Each live prefix carries separate probability
// mass for blank-ending and symbol-ending paths; identical prefixes merge
// by log-sum-exp. With beam_width at least the number of reachable
// labelings this is exact marginalization.
inline std::vector<ScoredLabeling> beam_decode(const LogitMatrix& logp,
                                               const CtcSymbolTable& table,
                                               const BeamConfig& cfg = {}) {
  cfg.validate();
  if (logp.symbols != table.size())
    throw Error(ErrorCode::DimensionMismatch,
                "matrix width " + std::to_string(logp.symbols) + " != symbol table size " +
                    std::to_string(table.size()));

  struct Mass {
    double blank = kNegInf;     // paths ending in blank
    double non_blank = kNegInf; // paths ending in the prefix's last symbol
    double total() const { return log_sum_exp(blank, non_blank); }
  };

  std::map<std::vector<int>, Mass> beam;
  beam[{}] = Mass{0.0, kNegInf};

  for (int t = 0; t < logp.frames; ++t) {
    std::map<std::vector<int>, Mass> next;
    for (const auto& [prefix, mass] : beam) {
      const double total = mass.total();

      const double lp_blank = logp.at(t, CtcSymbolTable::kBlankIndex);
      if (lp_blank >= cfg.prune_logp_floor) {
        auto& m = next[prefix];
        m.blank = log_sum_exp(m.blank, total + lp_blank);
      }

      for (int v = 1; v < logp.symbols; ++v) {
        const double lp = logp.at(t, v);
        if (lp < cfg.prune_logp_floor) continue;
        if (!prefix.empty() && prefix.back() == v) {
          // Same symbol again: without an intervening blank it extends the
          // existing run; after a blank it starts a new token.
          auto& same = next[prefix];
          same.non_blank = log_sum_exp(same.non_blank, mass.non_blank + lp);
          std::vector<int> grown = prefix;
          grown.push_back(v);
          auto& m = next[grown];
          m.non_blank = log_sum_exp(m.non_blank, mass.blank + lp);
        } else {
          std::vector<int> grown = prefix;
          grown.push_back(v);
          auto& m = next[grown];
          m.non_blank = log_sum_exp(m.non_blank, total + lp);
        }
      }
    }

    if (static_cast<int>(next.size()) > cfg.beam_width) {
      std::vector<std::pair<double, const std::vector<int>*>> ranked;
      ranked.reserve(next.size());
      for (const auto& [prefix, mass] : next) ranked.emplace_back(mass.total(), &prefix);
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      std::map<std::vector<int>, Mass> pruned;
      for (int i = 0; i < cfg.beam_width; ++i) pruned[*ranked[i].second] = next[*ranked[i].second];
      next = std::move(pruned);
    }
    beam = std::move(next);
  }

  std::vector<ScoredLabeling> out;
  out.reserve(beam.size());
  for (const auto& [prefix, mass] : beam) out.push_back({prefix, mass.total()});
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredLabeling& a, const ScoredLabeling& b) {
                     return a.log_prob > b.log_prob;
                   });
  if (static_cast<int>(out.size()) > cfg.beam_width) out.resize(static_cast<std::size_t>(cfg.beam_width));
  return out;
}

// Logit file: magic "CTCL", u32 version, u32 T, u32 V, then T*V
// little-endian float32 values, row-major.
inline void write_logits(const LogitMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open for write: " + path);
  auto put_u32 = [&out](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  out.write("CTCL", 4);
  put_u32(1);
  put_u32(static_cast<std::uint32_t>(m.frames));
  put_u32(static_cast<std::uint32_t>(m.symbols));
  for (double x : m.values) {
    float f = static_cast<float>(x);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    put_u32(u);
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

inline LogitMatrix read_logits(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  auto get_u32 = [&in, &path]() {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
      throw Error(ErrorCode::MalformedFile, "truncated logit file: " + path);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  };
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "CTCL", 4) != 0)
    throw Error(ErrorCode::MalformedFile, "bad magic in logit file: " + path);
  const std::uint32_t version = get_u32();
  if (version != 1)
    throw Error(ErrorCode::MalformedFile,
                "unsupported logit file version " + std::to_string(version));
  const std::uint32_t t = get_u32();
  const std::uint32_t v = get_u32();
  if (t < 1 || v < 1 || t > (1u << 26) || v > (1u << 20))
    throw Error(ErrorCode::MalformedFile, "implausible logit dimensions in " + path);
  LogitMatrix m(static_cast<int>(t), static_cast<int>(v));
  for (auto& x : m.values) {
    const std::uint32_t u = get_u32();
    float f;
    std::memcpy(&f, &u, 4);
    x = static_cast<double>(f);
  }
  char extra;
  if (in.read(&extra, 1))
    throw Error(ErrorCode::MalformedFile, "trailing bytes in logit file: " + path);
  m.check_finite();
  return m;
}

}  // namespace asrforge
