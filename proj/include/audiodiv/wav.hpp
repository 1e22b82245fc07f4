// Copyright 2026 The audiodiv Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal RIFF/WAVE codec: PCM 16-bit or IEEE float 32-bit, mono or stereo.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "audiodiv/common.hpp"
#include "audiodiv/tensor_io.hpp"

namespace audiodiv {

enum class SampleFormat { kPcm16, kFloat32 };

struct WavAudio {
  std::uint32_t sample_rate = 44100;
  std::uint16_t channels = 1;
  SampleFormat format = SampleFormat::kFloat32;
  std::vector<double> samples;  ///< interleaved, nominally in [-1, 1]

  std::size_t frames() const { return channels ? samples.size() / channels : 0; }
};

namespace detail {

inline std::uint32_t u32_at(std::string_view b, std::size_t off) { return from_little_endian<std::uint32_t>(b.data() + off); }
inline std::uint16_t u16_at(std::string_view b, std::size_t off) { return from_little_endian<std::uint16_t>(b.data() + off); }

}  // namespace detail

inline WavAudio decode_wav(std::string_view bytes, const std::string& where = "<wav>") {
  using namespace detail;
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
    throw FormatError(where + ": not a RIFF/WAVE file");
  }
  WavAudio w;
  bool have_fmt = false, have_data = false;
  std::uint16_t tag = 0, bits = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string_view id = bytes.substr(pos, 4);
    const std::size_t size = u32_at(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw FormatError(where + ": truncated chunk '" + std::string(id) + "'");
    if (id == "fmt ") {
      if (size < 16) throw FormatError(where + ": short fmt chunk");
      tag = u16_at(bytes, body);
      w.channels = u16_at(bytes, body + 2);
      w.sample_rate = u32_at(bytes, body + 4);
      bits = u16_at(bytes, body + 14);
      if (tag == 0xFFFE && size >= 40) tag = u16_at(bytes, body + 24);  // extensible: subformat GUID
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError(where + ": data chunk before fmt chunk");
      if (w.channels != 1 && w.channels != 2) throw FormatError(where + ": only mono or stereo is supported");
      std::size_t width = 0;
      if (tag == 1 && bits == 16) {
        w.format = SampleFormat::kPcm16;
        width = 2;
      } else if (tag == 3 && bits == 32) {
        w.format = SampleFormat::kFloat32;
        width = 4;
      } else {
        throw FormatError(where + ": unsupported sample format (tag " + std::to_string(tag) + ", " +
                          std::to_string(bits) + " bits)");
      }
      const std::size_t count = size / width;
      w.samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const char* p = bytes.data() + body + i * width;
        w.samples[i] = width == 2 ? static_cast<double>(from_little_endian<std::int16_t>(p)) / 32768.0
                                  : static_cast<double>(from_little_endian<float>(p));
      }
      have_data = true;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || !have_data) throw FormatError(where + ": missing fmt or data chunk");
  for (double s : w.samples) {
    if (!std::isfinite(s)) throw DataError(where + ": non-finite sample");
  }
  return w;
}

/// Canonical 44-byte-header encoding. 16-bit output clamps to [-1, 1)
/// before rounding; float output is written unclipped.
inline std::string encode_wav(const WavAudio& w) {
  using detail::append_little_endian;
  const std::uint16_t width = w.format == SampleFormat::kPcm16 ? 2 : 4;
  const auto data_size = static_cast<std::uint32_t>(w.samples.size() * width);
  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  append_little_endian(out, static_cast<std::uint32_t>(36 + data_size));
  out += "WAVEfmt ";
  append_little_endian(out, std::uint32_t{16});
  append_little_endian(out, static_cast<std::uint16_t>(w.format == SampleFormat::kPcm16 ? 1 : 3));
  append_little_endian(out, w.channels);
  append_little_endian(out, w.sample_rate);
  append_little_endian(out, static_cast<std::uint32_t>(w.sample_rate * w.channels * width));
  append_little_endian(out, static_cast<std::uint16_t>(w.channels * width));
  append_little_endian(out, static_cast<std::uint16_t>(width * 8));
  out += "data";
  append_little_endian(out, data_size);
  for (double s : w.samples) {
    if (w.format == SampleFormat::kPcm16) {
      const double q = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
      append_little_endian(out, static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0)));
    } else {
      append_little_endian(out, static_cast<float>(s));
    }
  }
  return out;
}

inline WavAudio read_wav(const std::filesystem::path& path) {
  return decode_wav(detail::read_file_bytes(path), path.string());
}

inline void write_wav(const WavAudio& w, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_wav(w));
}

}  // namespace audiodiv
