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

// Standard MIDI File (formats 0 and 1) reading and writing, note pairing,
// and tick/second conversion through the tempo map.
//
// Events keep their raw bytes (status byte included) and absolute tick, so
// anything not deliberately edited is written back unchanged. Running
// status is understood on read and never produced on write.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "audiodiv/common.hpp"
#include "audiodiv/tensor_io.hpp"

namespace audiodiv {

struct MidiEvent {
  std::uint64_t tick = 0;
  std::vector<std::uint8_t> bytes;

  std::uint8_t status() const { return bytes.empty() ? 0 : bytes[0]; }
  bool is_meta() const { return status() == 0xFF; }
  bool is_end_of_track() const { return is_meta() && bytes.size() >= 2 && bytes[1] == 0x2F; }
  bool is_note_on() const { return (status() & 0xF0) == 0x90 && bytes.size() == 3 && bytes[2] > 0; }
  bool is_note_off() const {
    return bytes.size() == 3 && ((status() & 0xF0) == 0x80 || ((status() & 0xF0) == 0x90 && bytes[2] == 0));
  }
  int channel() const { return status() & 0x0F; }

  bool operator==(const MidiEvent&) const = default;
};

struct MidiTrack {
  std::vector<MidiEvent> events;
  bool operator==(const MidiTrack&) const = default;
};

struct MidiFile {
  std::uint16_t format = 1;
  std::uint16_t division = 480;  ///< ticks per quarter note
  std::vector<MidiTrack> tracks;
  bool operator==(const MidiFile&) const = default;
};

/// A paired note-on/note-off, referring back to its two events.
struct MidiNote {
  std::size_t track = 0;
  std::size_t on_event = 0;
  std::size_t off_event = 0;
  int channel = 0;
  int pitch = 0;
  int velocity = 0;
  std::uint64_t on_tick = 0;
  std::uint64_t off_tick = 0;

  bool operator==(const MidiNote&) const = default;
};

namespace detail {

class ByteReader {
 public:
  ByteReader(std::string_view data, std::string where) : data_(data), where_(std::move(where)) {}

  bool done() const { return pos_ >= data_.size(); }
  std::size_t pos() const { return pos_; }

  std::uint8_t u8() {
    if (pos_ >= data_.size()) throw FormatError(where_ + ": unexpected end of data");
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint8_t peek() const {
    if (pos_ >= data_.size()) throw FormatError(where_ + ": unexpected end of data");
    return static_cast<std::uint8_t>(data_[pos_]);
  }
  std::uint32_t be(int n) {
    std::uint32_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | u8();
    return v;
  }
  std::uint32_t vlq() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7F);
      if (!(b & 0x80)) return v;
    }
    throw FormatError(where_ + ": variable-length quantity too long");
  }
  std::string_view take(std::size_t n) {
    if (pos_ + n > data_.size()) throw FormatError(where_ + ": truncated data");
    std::string_view s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string_view data_;
  std::string where_;
  std::size_t pos_ = 0;
};

inline void put_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t buf[5];
  int n = 0;
  buf[n++] = v & 0x7F;
  while (v >>= 7) buf[n++] = static_cast<std::uint8_t>((v & 0x7F) | 0x80);
  while (n) out.push_back(buf[--n]);
}

inline void put_be(std::string& out, std::uint32_t v, int n) {
  for (int i = n - 1; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline int channel_data_length(std::uint8_t status) {
  const std::uint8_t hi = status & 0xF0;
  return (hi == 0xC0 || hi == 0xD0) ? 1 : 2;
}

}  // namespace detail

inline MidiFile decode_midi(std::string_view bytes, const std::string& where = "<midi>") {
  detail::ByteReader r(bytes, where);
  if (r.take(4) != "MThd") throw FormatError(where + ": missing MThd header");
  const std::uint32_t header_len = r.be(4);
  if (header_len < 6) throw FormatError(where + ": short MThd header");
  MidiFile f;
  f.format = static_cast<std::uint16_t>(r.be(2));
  const std::uint32_t ntracks = r.be(2);
  f.division = static_cast<std::uint16_t>(r.be(2));
  r.take(header_len - 6);
  if (f.format > 1) throw FormatError(where + ": only SMF formats 0 and 1 are supported");
  if (f.division & 0x8000) throw FormatError(where + ": SMPTE time division is not supported");
  if (f.division == 0) throw FormatError(where + ": zero ticks per quarter note");

  for (std::uint32_t t = 0; t < ntracks; ++t) {
    if (r.take(4) != "MTrk") throw FormatError(where + ": missing MTrk chunk " + std::to_string(t));
    const std::uint32_t len = r.be(4);
    detail::ByteReader tr(r.take(len), where + " track " + std::to_string(t));
    MidiTrack track;
    std::uint64_t tick = 0;
    std::uint8_t running = 0;
    while (!tr.done()) {
      tick += tr.vlq();
      MidiEvent ev;
      ev.tick = tick;
      std::uint8_t status = tr.peek();
      if (status < 0x80) {
        if (!running) throw FormatError(where + ": data byte without running status");
        status = running;
      } else {
        tr.u8();
      }
      ev.bytes.push_back(status);
      if (status == 0xFF) {
        ev.bytes.push_back(tr.u8());
        const std::uint32_t n = tr.vlq();
        detail::put_vlq(ev.bytes, n);
        auto body = tr.take(n);
        ev.bytes.insert(ev.bytes.end(), body.begin(), body.end());
        running = 0;
      } else if (status == 0xF0 || status == 0xF7) {
        const std::uint32_t n = tr.vlq();
        detail::put_vlq(ev.bytes, n);
        auto body = tr.take(n);
        ev.bytes.insert(ev.bytes.end(), body.begin(), body.end());
        running = 0;
      } else if (status >= 0xF0) {
        throw FormatError(where + ": unexpected system message in track");
      } else {
        for (int i = 0; i < detail::channel_data_length(status); ++i) ev.bytes.push_back(tr.u8());
        running = status;
      }
      track.events.push_back(std::move(ev));
    }
    f.tracks.push_back(std::move(track));
  }
  return f;
}

inline std::string encode_midi(const MidiFile& f) {
  std::string out = "MThd";
  detail::put_be(out, 6, 4);
  detail::put_be(out, f.format, 2);
  detail::put_be(out, static_cast<std::uint32_t>(f.tracks.size()), 2);
  detail::put_be(out, f.division, 2);
  for (const auto& track : f.tracks) {
    std::vector<std::uint8_t> body;
    std::uint64_t prev = 0;
    for (const auto& ev : track.events) {
      detail::put_vlq(body, static_cast<std::uint32_t>(ev.tick - prev));
      prev = ev.tick;
      body.insert(body.end(), ev.bytes.begin(), ev.bytes.end());
    }
    out += "MTrk";
    detail::put_be(out, static_cast<std::uint32_t>(body.size()), 4);
    out.append(body.begin(), body.end());
  }
  return out;
}

inline MidiFile read_midi(const std::filesystem::path& path) {
  return decode_midi(detail::read_file_bytes(path), path.string());
}

inline void write_midi(const MidiFile& f, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_midi(f));
}

/// Pairs every note-on with the earliest open note-off on the same
/// (track, channel, pitch). Unpaired events raise FormatError.
inline std::vector<MidiNote> extract_notes(const MidiFile& f) {
  std::vector<MidiNote> notes;
  for (std::size_t t = 0; t < f.tracks.size(); ++t) {
    std::map<std::pair<int, int>, std::deque<std::size_t>> open;  // key -> indices into notes
    const auto& events = f.tracks[t].events;
    for (std::size_t e = 0; e < events.size(); ++e) {
      const MidiEvent& ev = events[e];
      if (ev.is_note_on()) {
        MidiNote n;
        n.track = t;
        n.on_event = e;
        n.channel = ev.channel();
        n.pitch = ev.bytes[1];
        n.velocity = ev.bytes[2];
        n.on_tick = ev.tick;
        open[{n.channel, n.pitch}].push_back(notes.size());
        notes.push_back(n);
      } else if (ev.is_note_off()) {
        auto& q = open[{ev.channel(), ev.bytes[1]}];
        if (q.empty()) {
          throw FormatError("track " + std::to_string(t) + ": note-off without matching note-on at tick " +
                            std::to_string(ev.tick));
        }
        MidiNote& n = notes[q.front()];
        q.pop_front();
        n.off_event = e;
        n.off_tick = ev.tick;
      }
    }
    for (const auto& [key, q] : open) {
      if (!q.empty()) {
        throw FormatError("track " + std::to_string(t) + ": note-on without note-off (pitch " +
                          std::to_string(key.second) + ")");
      }
    }
  }
  return notes;
}

/// Piecewise-linear tick <-> seconds mapping from the file's set-tempo
/// events (default 120 bpm).
class TempoMap {
 public:
  explicit TempoMap(const MidiFile& f) : division_(f.division) {
    std::vector<std::pair<std::uint64_t, double>> changes;  // tick, microseconds per quarter
    for (const auto& track : f.tracks) {
      for (const auto& ev : track.events) {
        if (ev.is_meta() && ev.bytes.size() == 6 && ev.bytes[1] == 0x51 && ev.bytes[2] == 3) {
          changes.emplace_back(ev.tick, (ev.bytes[3] << 16) | (ev.bytes[4] << 8) | ev.bytes[5]);
        }
      }
    }
    std::stable_sort(changes.begin(), changes.end(), [](auto& a, auto& b) { return a.first < b.first; });
    segments_.push_back({0, 0.0, 500000.0});
    for (const auto& [tick, us] : changes) {
      const Segment& last = segments_.back();
      const double sec = last.seconds + static_cast<double>(tick - last.tick) * last.us_per_quarter / (1e6 * division_);
      if (tick == last.tick) {
        segments_.back().us_per_quarter = us;
      } else {
        segments_.push_back({tick, sec, us});
      }
    }
  }

  double seconds(std::uint64_t tick) const {
    const Segment& s = segment_for_tick(tick);
    return s.seconds + static_cast<double>(tick - s.tick) * s.us_per_quarter / (1e6 * division_);
  }

  /// Fractional tick position of a time in seconds (>= 0).
  double ticks(double seconds) const {
    const Segment* s = &segments_.front();
    for (const auto& seg : segments_) {
      if (seg.seconds <= seconds) s = &seg;
    }
    return static_cast<double>(s->tick) + (seconds - s->seconds) * 1e6 * division_ / s->us_per_quarter;
  }

 private:
  struct Segment {
    std::uint64_t tick;
    double seconds;
    double us_per_quarter;
  };

  const Segment& segment_for_tick(std::uint64_t tick) const {
    const Segment* s = &segments_.front();
    for (const auto& seg : segments_) {
      if (seg.tick <= tick) s = &seg;
    }
    return *s;
  }

  double division_;
  std::vector<Segment> segments_;
};

}  // namespace audiodiv
