#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "asrforge/audio.hpp"
#include "asrforge/error.hpp"

namespace asrforge {

namespace detail {

inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void append_u16le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void append_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

}  // namespace detail

// Reads a RIFF/WAVE file holding PCM 16-bit or IEEE float 32-bit samples,
// 1 or 2 channels. Stereo is downmixed by per-sample arithmetic mean and
// integer samples are scaled by 1/32768.
inline AudioBuffer read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();

  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::MalformedContainer, "not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= n) {
    const char* id = reinterpret_cast<const char*>(p + off);
    std::uint32_t chunk_len = detail::read_u32le(p + off + 4);
    off += 8;
    if (off + chunk_len > n)
      throw Error(ErrorCode::MalformedContainer, "truncated chunk in " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (chunk_len < 16)
        throw Error(ErrorCode::MalformedContainer, "short fmt chunk in " + path);
      format = detail::read_u16le(p + off);
      channels = detail::read_u16le(p + off + 2);
      rate = detail::read_u32le(p + off + 4);
      bits = detail::read_u16le(p + off + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = p + off;
      data_len = chunk_len;
    }
    off += chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr)
    throw Error(ErrorCode::MalformedContainer, "missing fmt/data chunk in " + path);
  if (rate == 0)
    throw Error(ErrorCode::MalformedContainer, "zero sample rate in " + path);
  if (channels != 1 && channels != 2)
    throw Error(ErrorCode::UnsupportedEncoding,
                std::to_string(channels) + " channels in " + path);

  const bool pcm16 = (format == 1 && bits == 16);
  const bool float32 = (format == 3 && bits == 32);
  if (!pcm16 && !float32)
    throw Error(ErrorCode::UnsupportedEncoding,
                "format " + std::to_string(format) + "/" + std::to_string(bits) +
                    "-bit in " + path);

  const std::size_t bytes_per_sample = pcm16 ? 2 : 4;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t frames = data_len / frame_bytes;
  if (frames == 0) throw Error(ErrorCode::EmptyAudio, "no samples in " + path);

  std::vector<float> mono(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    float acc = 0.0f;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const unsigned char* s = data + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        std::int16_t v = static_cast<std::int16_t>(detail::read_u16le(s));
        acc += static_cast<float>(v) / 32768.0f;
      } else {
        float v;
        std::uint32_t u = detail::read_u32le(s);
        std::memcpy(&v, &u, 4);
        acc += v;
      }
    }
    mono[i] = acc / channels;
  }
  return AudioBuffer(std::move(mono), static_cast<int>(rate));
}

// Writes a mono PCM16 little-endian WAV. Samples are quantized with
// round(x * 32768) clamped to the int16 range, so a read-back differs from
// the source by at most one quantization step.
inline void write_wav(const AudioBuffer& buf, const std::string& path) {
  std::string out;
  out.reserve(44 + buf.size() * 2);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(buf.size() * 2);

  out.append("RIFF");
  detail::append_u32le(out, 36 + data_bytes);
  out.append("WAVE");
  out.append("fmt ");
  detail::append_u32le(out, 16);
  detail::append_u16le(out, 1);  // PCM
  detail::append_u16le(out, 1);  // mono
  detail::append_u32le(out, static_cast<std::uint32_t>(buf.sample_rate_hz));
  detail::append_u32le(out, static_cast<std::uint32_t>(buf.sample_rate_hz) * 2);
  detail::append_u16le(out, 2);   // block align
  detail::append_u16le(out, 16);  // bits per sample
  out.append("data");
  detail::append_u32le(out, data_bytes);

  for (float x : buf.samples) {
    long q = std::lround(static_cast<double>(x) * 32768.0);
    q = std::max(-32768L, std::min(32767L, q));
    detail::append_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open for write: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

}  // namespace asrforge
