#pragma once

// Shared helpers and independent oracle implementations for the test
// suites. Everything here is deliberately written as plain brute force or
// textbook reference code, separate from the library's algorithms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "asrforge/ctc.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& name) {
  return std::string(ASRFORGE_FIXTURE_DIR) + "/" + name;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

// ---- CTC oracles ---------------------------------------------------------

// Collapse a frame-level path: remove consecutive repeats, then blanks.
inline std::vector<int> collapse_path(const std::vector<int>& path, int blank = 0) {
  std::vector<int> out;
  int prev = -1;
  for (int v : path) {
    if (v != prev && v != blank) out.push_back(v);
    prev = v;
  }
  return out;
}

// Total probability of every V^T path, grouped by collapsed labeling.
inline std::map<std::vector<int>, double> enumerate_labelings(const asrforge::LogitMatrix& logp) {
  const int T = logp.frames;
  const int V = logp.symbols;
  std::map<std::vector<int>, double> mass;
  std::vector<int> path(static_cast<std::size_t>(T), 0);
  while (true) {
    double lp = 0.0;
    for (int t = 0; t < T; ++t) lp += logp.at(t, path[static_cast<std::size_t>(t)]);
    mass[collapse_path(path)] += std::exp(lp);

    int pos = T - 1;
    while (pos >= 0 && path[static_cast<std::size_t>(pos)] == V - 1) {
      path[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++path[static_cast<std::size_t>(pos)];
  }
  return mass;
}

// -log P(target) by exhaustive path enumeration.
inline double brute_force_ctc_loss(const asrforge::LogitMatrix& logp,
                                   const std::vector<int>& target) {
  const auto mass = enumerate_labelings(logp);
  const auto it = mass.find(target);
  if (it == mass.end() || it->second <= 0.0)
    return std::numeric_limits<double>::infinity();
  return -std::log(it->second);
}

// Most probable labeling under full marginalization.
inline asrforge::ScoredLabeling brute_force_best_labeling(const asrforge::LogitMatrix& logp) {
  const auto mass = enumerate_labelings(logp);
  asrforge::ScoredLabeling best;
  for (const auto& [labels, p] : mass) {
    const double lp = std::log(p);
    if (lp > best.log_prob) {
      best.log_prob = lp;
      best.labels = labels;
    }
  }
  return best;
}

// Central finite differences of the CTC loss with respect to the logits.
inline asrforge::LogitMatrix fd_ctc_grad(const asrforge::LogitMatrix& logits,
                                         const asrforge::TargetSequence& target,
                                         double eps = 1e-5) {
  asrforge::LogitMatrix grad(logits.frames, logits.symbols);
  for (int t = 0; t < logits.frames; ++t) {
    for (int v = 0; v < logits.symbols; ++v) {
      asrforge::LogitMatrix plus = logits, minus = logits;
      plus.at(t, v) += eps;
      minus.at(t, v) -= eps;
      const double lp = asrforge::ctc_loss(asrforge::log_softmax(plus), target).loss;
      const double lm = asrforge::ctc_loss(asrforge::log_softmax(minus), target).loss;
      grad.at(t, v) = (lp - lm) / (2.0 * eps);
    }
  }
  return grad;
}

// ---- edit distance oracle --------------------------------------------------

// Exponential recursion, no memoization; only for tiny inputs.
template <typename T>
long ed_recursive(const std::vector<T>& a, std::size_t i, const std::vector<T>& b,
                  std::size_t j) {
  if (i == a.size()) return static_cast<long>(b.size() - j);
  if (j == b.size()) return static_cast<long>(a.size() - i);
  const long sub = ed_recursive(a, i + 1, b, j + 1) + (a[i] == b[j] ? 0 : 1);
  const long del = ed_recursive(a, i + 1, b, j) + 1;
  const long ins = ed_recursive(a, i, b, j + 1) + 1;
  return std::min({sub, del, ins});
}

template <typename T>
long ed_recursive(const std::vector<T>& a, const std::vector<T>& b) {
  return ed_recursive(a, 0, b, 0);
}

// ---- spectral tools ---------------------------------------------------------

// Iterative radix-2 FFT for the resampler's spectral checks.
inline void fft(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = x[i + k];
        const auto v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Blackman-windowed power spectrum; returns per-bin magnitude and the
// frequency step in Hz.
struct Spectrum {
  std::vector<double> magnitude;  // bins 0 .. n/2
  double bin_hz = 0.0;

  std::size_t peak_bin() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < magnitude.size(); ++i)
      if (magnitude[i] > magnitude[best]) best = i;
    return best;
  }

  // Largest magnitude outside +/- guard_bins of the peak.
  double max_outside_peak(std::size_t guard_bins) const {
    const std::size_t peak = peak_bin();
    double best = 0.0;
    for (std::size_t i = 1; i < magnitude.size(); ++i) {  // skip DC
      const std::size_t dist = i > peak ? i - peak : peak - i;
      if (dist <= guard_bins) continue;
      best = std::max(best, magnitude[i]);
    }
    return best;
  }
};

inline Spectrum power_spectrum(const std::vector<float>& samples, int rate_hz) {
  std::size_t n = 1;
  while (n < samples.size()) n <<= 1;
  std::vector<std::complex<double>> x(n, 0.0);
  const std::size_t m = samples.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double w = 0.42 - 0.5 * std::cos(2.0 * M_PI * i / (m - 1)) +
                     0.08 * std::cos(4.0 * M_PI * i / (m - 1));
    x[i] = samples[i] * w;
  }
  fft(x);
  Spectrum s;
  s.bin_hz = static_cast<double>(rate_hz) / static_cast<double>(n);
  s.magnitude.resize(n / 2 + 1);
  for (std::size_t i = 0; i <= n / 2; ++i) s.magnitude[i] = std::abs(x[i]);
  return s;
}

// ---- generators --------------------------------------------------------------

inline std::vector<float> make_sine(double freq_hz, int rate_hz, double seconds,
                                    double amplitude = 0.5) {
  const auto n = static_cast<std::size_t>(std::lround(seconds * rate_hz));
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<float>(amplitude * std::sin(2.0 * M_PI * freq_hz * i / rate_hz));
  return out;
}

// Logit matrix that voices a label sequence: one blank frame, then per
// label two strong frames followed by a blank frame.
inline asrforge::LogitMatrix synth_logits(const std::vector<int>& labels, int vocab,
                                          double strength = 10.0) {
  const int T = 1 + 3 * static_cast<int>(labels.size());
  asrforge::LogitMatrix m(std::max(T, 1), vocab, 0.0);
  auto voice = [&](int t, int v) {
    m.at(t, v) = strength;
  };
  voice(0, 0);
  int t = 1;
  for (int label : labels) {
    voice(t++, label);
    voice(t++, label);
    voice(t++, 0);
  }
  return m;
}

// Deterministic RNG helpers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int uniform_int(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace testutil
