#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "asrforge/audio.hpp"
#include "asrforge/error.hpp"

namespace asrforge {

struct FrameConfig {
  int frame_ms = 30;
  int hop_ms = 10;
  // Logistic mapping from frame energy (dB above the noise floor) to a
  // speech probability.
  double margin_db = 12.0;
  double scale_db = 6.0;
  // The adaptive floor never rises above this, so recordings without quiet
  // passages still score as speech.
  double floor_cap_db = -50.0;
};

// Per-frame speech probabilities with their frame geometry.
struct FrameProbabilities {
  std::vector<double> probs;
  int frame_ms = 30;
  int hop_ms = 10;

  FrameProbabilities() = default;

  FrameProbabilities(std::vector<double> p, int frame, int hop)
      : probs(std::move(p)), frame_ms(frame), hop_ms(hop) {
    if (frame_ms <= 0 || hop_ms <= 0 || frame_ms < hop_ms)
      throw Error(ErrorCode::MalformedFile, "invalid frame geometry");
    for (double v : probs)
      if (!(v >= 0.0 && v <= 1.0))
        throw Error(ErrorCode::OutOfRangeProbability,
                    "probability " + std::to_string(v) + " outside [0,1]");
  }

  double frame_s() const { return frame_ms / 1000.0; }
  double hop_s() const { return hop_ms / 1000.0; }
  double frame_start_s(std::size_t i) const { return static_cast<double>(i) * hop_ms / 1000.0; }
};

struct ChunkingConfig {
  double min_chunk_s = 3.0;
  double max_chunk_s = 32.0;
  double speech_prob_threshold = 0.70;
  double merge_gap_s = 0.30;
  double onset_prob = 0.60;
  double offset_prob = 0.40;

  void validate() const {
    if (!(0.0 < min_chunk_s && min_chunk_s < max_chunk_s))
      throw Error(ErrorCode::MalformedFile, "need 0 < min_chunk_s < max_chunk_s");
    if (!(0.0 < speech_prob_threshold && speech_prob_threshold < 1.0))
      throw Error(ErrorCode::MalformedFile, "speech_prob_threshold outside (0,1)");
    if (!(offset_prob <= onset_prob))
      throw Error(ErrorCode::MalformedFile, "offset_prob must not exceed onset_prob");
  }
};

// A training-ready span of speech, in source-buffer time.
struct SpeechChunk {
  double start_s = 0.0;
  double end_s = 0.0;
  double mean_speech_prob = 0.0;
  std::string source_id;

  double duration_s() const { return end_s - start_s; }
};

namespace detail {

inline double interpolated_percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace detail

// Energy-based speech probability. Per-frame energy in dB is compared to an
// adaptive noise floor (the 20th percentile of frame energies, capped at
// cfg.floor_cap_db) and mapped through a logistic.
inline FrameProbabilities compute_speech_probs(const AudioBuffer& buf,
                                               const FrameConfig& cfg = {}) {
  const std::size_t frame_len =
      static_cast<std::size_t>(cfg.frame_ms) * buf.sample_rate_hz / 1000;
  const std::size_t hop =
      static_cast<std::size_t>(cfg.hop_ms) * buf.sample_rate_hz / 1000;
  if (frame_len == 0 || hop == 0)
    throw Error(ErrorCode::BufferTooShort, "frame shorter than one sample");
  if (buf.size() < frame_len)
    throw Error(ErrorCode::BufferTooShort,
                "buffer shorter than one frame (" + std::to_string(buf.size()) +
                    " < " + std::to_string(frame_len) + " samples)");

  const std::size_t n_frames = (buf.size() - frame_len) / hop + 1;
  std::vector<double> energy_db(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    double e = 0.0;
    for (std::size_t j = 0; j < frame_len; ++j) {
      const double s = buf.samples[i * hop + j];
      e += s * s;
    }
    e /= static_cast<double>(frame_len);
    energy_db[i] = 10.0 * std::log10(e + 1e-10);
  }

  const double floor_db = std::min(
      detail::interpolated_percentile(energy_db, 0.20), cfg.floor_cap_db);

  std::vector<double> probs(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double z = (energy_db[i] - floor_db - cfg.margin_db) / cfg.scale_db;
    probs[i] = 1.0 / (1.0 + std::exp(-z));
  }
  return FrameProbabilities(std::move(probs), cfg.frame_ms, cfg.hop_ms);
}

// Frame-probability file: header "#frame_ms=<int> hop_ms=<int>", then one
// decimal probability per line.
inline FrameProbabilities import_speech_probs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);

  std::string header;
  if (!std::getline(in, header))
    throw Error(ErrorCode::MalformedFile, "empty probability file: " + path);
  int frame_ms = 0, hop_ms = 0;
  if (std::sscanf(header.c_str(), "#frame_ms=%d hop_ms=%d", &frame_ms, &hop_ms) != 2)
    throw Error(ErrorCode::MalformedFile, "bad header in " + path + ": " + header);

  std::vector<double> probs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t consumed = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &consumed);
    } catch (const std::exception&) {
      throw Error(ErrorCode::MalformedFile, "bad probability line in " + path + ": " + line);
    }
    if (consumed != line.size())
      throw Error(ErrorCode::MalformedFile, "bad probability line in " + path + ": " + line);
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(ErrorCode::OutOfRangeProbability,
                  "probability " + line + " outside [0,1] in " + path);
    probs.push_back(v);
  }
  if (frame_ms <= 0 || hop_ms <= 0 || frame_ms < hop_ms)
    throw Error(ErrorCode::MalformedFile, "bad frame geometry in " + path);
  return FrameProbabilities(std::move(probs), frame_ms, hop_ms);
}

inline void export_speech_probs(const FrameProbabilities& fp, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open for write: " + path);
  out << "#frame_ms=" << fp.frame_ms << " hop_ms=" << fp.hop_ms << "\n";
  char buf[32];
  for (double v : fp.probs) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out << buf << "\n";
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

// Hysteresis segment detection: a segment opens when the frame probability
// reaches cfg.onset_prob and closes when it drops below cfg.offset_prob.
// Segments separated by gaps shorter than cfg.merge_gap_s are merged.
inline std::vector<std::pair<double, double>> detect_segments(
    const FrameProbabilities& fp, const ChunkingConfig& cfg = {}) {
  cfg.validate();
  std::vector<std::pair<double, double>> raw;
  bool open = false;
  double seg_start = 0.0;
  double seg_end = 0.0;
  for (std::size_t i = 0; i < fp.probs.size(); ++i) {
    const double p = fp.probs[i];
    if (!open) {
      if (p >= cfg.onset_prob) {
        open = true;
        seg_start = fp.frame_start_s(i);
        seg_end = seg_start + fp.frame_s();
      }
    } else {
      if (p < cfg.offset_prob) {
        open = false;
        raw.emplace_back(seg_start, seg_end);
      } else {
        seg_end = fp.frame_start_s(i) + fp.frame_s();
      }
    }
  }
  if (open) raw.emplace_back(seg_start, seg_end);

  std::vector<std::pair<double, double>> merged;
  for (const auto& seg : raw) {
    if (!merged.empty() && seg.first - merged.back().second < cfg.merge_gap_s)
      merged.back().second = seg.second;
    else
      merged.push_back(seg);
  }
  return merged;
}

namespace detail {

// Frames whose start time falls inside [start_s, end_s).
inline std::pair<std::size_t, std::size_t> frame_range(
    const FrameProbabilities& fp, double start_s, double end_s) {
  const double hop = fp.hop_s();
  std::size_t first = static_cast<std::size_t>(std::max(0.0, std::ceil(start_s / hop - 1e-9)));
  std::size_t last = static_cast<std::size_t>(std::max(0.0, std::ceil(end_s / hop - 1e-9)));
  first = std::min(first, fp.probs.size());
  last = std::min(last, fp.probs.size());
  return {first, last};
}

inline void split_recursive(double start_s, double end_s,
                            const FrameProbabilities& fp,
                            const ChunkingConfig& cfg,
                            std::vector<std::pair<double, double>>& out) {
  const double dur = end_s - start_s;
  if (dur <= cfg.max_chunk_s) {
    out.emplace_back(start_s, end_s);
    return;
  }
  // Split at the minimum-probability frame within the central half of the
  // span, so no fragment can fall below a quarter of the parent duration.
  const double lo = start_s + 0.25 * dur;
  const double hi = start_s + 0.75 * dur;
  auto [first, last] = frame_range(fp, lo, hi);
  double split_s;
  if (first >= last) {
    split_s = start_s + 0.5 * dur;
  } else {
    std::size_t best = first;
    for (std::size_t i = first; i < last; ++i)
      if (fp.probs[i] < fp.probs[best]) best = i;
    split_s = fp.frame_start_s(best);
  }
  split_recursive(start_s, split_s, fp, cfg, out);
  split_recursive(split_s, end_s, fp, cfg, out);
}

}  // namespace detail

// Cuts detected segments into chunks obeying the duration window and the
// mean-probability threshold. Over-long segments are split recursively;
// pieces below the duration floor or the probability threshold are dropped.
inline std::vector<SpeechChunk> chunk_segments(
    const std::vector<std::pair<double, double>>& segments,
    const FrameProbabilities& fp, const ChunkingConfig& cfg = {},
    const std::string& source_id = "") {
  cfg.validate();
  std::vector<SpeechChunk> chunks;
  for (const auto& seg : segments) {
    std::vector<std::pair<double, double>> pieces;
    detail::split_recursive(seg.first, seg.second, fp, cfg, pieces);
    for (const auto& piece : pieces) {
      const double dur = piece.second - piece.first;
      if (dur < cfg.min_chunk_s) continue;
      auto [first, last] = detail::frame_range(fp, piece.first, piece.second);
      if (first >= last) continue;
      double mean = 0.0;
      for (std::size_t i = first; i < last; ++i) mean += fp.probs[i];
      mean /= static_cast<double>(last - first);
      if (mean < cfg.speech_prob_threshold) continue;
      chunks.push_back({piece.first, piece.second, mean, source_id});
    }
  }
  return chunks;
}

// Chunk files are named <source_id>_<start_ms>_<end_ms>.wav.
inline std::string chunk_filename(const SpeechChunk& chunk) {
  const long start_ms = std::lround(chunk.start_s * 1000.0);
  const long end_ms = std::lround(chunk.end_s * 1000.0);
  return chunk.source_id + "_" + std::to_string(start_ms) + "_" +
         std::to_string(end_ms) + ".wav";
}

inline AudioBuffer extract_chunk(const AudioBuffer& buf, const SpeechChunk& chunk) {
  const long rate = buf.sample_rate_hz;
  const std::size_t begin = std::min<std::size_t>(
      static_cast<std::size_t>(std::max(0L, std::lround(chunk.start_s * rate))), buf.size());
  const std::size_t end = std::min<std::size_t>(
      static_cast<std::size_t>(std::max(0L, std::lround(chunk.end_s * rate))), buf.size());
  std::vector<float> slice(buf.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                           buf.samples.begin() + static_cast<std::ptrdiff_t>(std::max(begin, end)));
  return AudioBuffer(std::move(slice), buf.sample_rate_hz);
}

}  // namespace asrforge
