#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "asrforge/audio.hpp"

namespace asrforge {

namespace detail {

inline double bessel_i0(double x) {
  // Series expansion; converges quickly for the beta values used here.
  double sum = 1.0, term = 1.0;
  const double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

inline double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

// Polyphase windowed-sinc resampler for a rational rate change L/M.
// The prototype lowpass has kTapsPerPhase taps per phase at the virtual
// rate L * in_rate, cutoff 0.45 * min(in_rate, out_rate), Kaiser window.
class PolyphaseResampler {
 public:
  static constexpr int kTapsPerPhase = 32;
  static constexpr double kKaiserBeta = 9.0;

  PolyphaseResampler(int in_rate, int out_rate) {
    const int g = std::gcd(in_rate, out_rate);
    up_ = out_rate / g;
    down_ = in_rate / g;

    const int taps = kTapsPerPhase * up_;
    const double center = (taps - 1) / 2.0;
    const double cutoff_hz = 0.45 * std::min(in_rate, out_rate);
    const double fc = cutoff_hz / (static_cast<double>(up_) * in_rate);
    const double i0_beta = bessel_i0(kKaiserBeta);

    proto_.resize(taps);
    for (int j = 0; j < taps; ++j) {
      const double u = (j - center) / center;  // in [-1, 1]
      const double w = bessel_i0(kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0_beta;
      proto_[j] = 2.0 * fc * sinc(2.0 * fc * (j - center)) * w;
    }
    // Unit DC gain per phase keeps levels constant across phases.
    phase_sum_.resize(up_);
    for (int p = 0; p < up_; ++p) {
      double s = 0.0;
      for (int m = 0; m < kTapsPerPhase; ++m) s += proto_[p + m * up_];
      phase_sum_[p] = s;
    }
  }

  std::vector<float> apply(const std::vector<float>& x) const {
    const std::int64_t in_len = static_cast<std::int64_t>(x.size());
    const std::int64_t out_len = (in_len * up_ + down_ / 2) / down_;
    const std::int64_t delay = static_cast<std::int64_t>(kTapsPerPhase / 2) * up_;

    std::vector<float> y(static_cast<std::size_t>(out_len));
    for (std::int64_t n = 0; n < out_len; ++n) {
      const std::int64_t v = n * down_ + delay;
      const int p = static_cast<int>(v % up_);
      const std::int64_t q = v / up_;
      double acc = 0.0;
      for (int m = 0; m < kTapsPerPhase; ++m) {
        const std::int64_t k = q - m;
        if (k < 0 || k >= in_len) continue;
        acc += proto_[p + m * up_] * x[static_cast<std::size_t>(k)];
      }
      y[static_cast<std::size_t>(n)] = static_cast<float>(acc / phase_sum_[p]);
    }
    return y;
  }

 private:
  int up_ = 1;
  int down_ = 1;
  std::vector<double> proto_;
  std::vector<double> phase_sum_;
};

}  // namespace detail

inline AudioBuffer resample(const AudioBuffer& buf, int target_rate_hz) {
  if (buf.sample_rate_hz == target_rate_hz) return buf;
  detail::PolyphaseResampler rs(buf.sample_rate_hz, target_rate_hz);
  return AudioBuffer(rs.apply(buf.samples), target_rate_hz);
}

inline AudioBuffer resample_to_16k(const AudioBuffer& buf) {
  return resample(buf, kCanonicalRateHz);
}

}  // namespace asrforge
