#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "asrforge/error.hpp"

namespace asrforge {

// Canonical internal sample rate. Everything downstream of ingest runs at
// this rate.
inline constexpr int kCanonicalRateHz = 16000;

// Mono sample stream. Amplitudes live in [-1, 1]; non-finite samples are
// zeroed and out-of-range ones clamped on construction, so a buffer in hand
// is always valid.
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate_hz = kCanonicalRateHz;

  AudioBuffer() = default;

  AudioBuffer(std::vector<float> s, int rate_hz)
      : samples(std::move(s)), sample_rate_hz(rate_hz) {
    if (sample_rate_hz <= 0)
      throw Error(ErrorCode::MalformedContainer, "sample rate must be positive");
    for (float& x : samples) {
      if (!std::isfinite(x)) x = 0.0f;
      x = std::clamp(x, -1.0f, 1.0f);
    }
  }

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }

  double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

}  // namespace asrforge
