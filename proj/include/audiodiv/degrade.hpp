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

// Model-free degradation ladders: additive Gaussian noise on audio
// (fidelity) and random note perturbation on MIDI (musicality).
//
// All randomness is keyed by (master seed, level, clip[, note]) so any
// single output file can be regenerated on its own.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "audiodiv/common.hpp"
#include "audiodiv/midi.hpp"
#include "audiodiv/parallel.hpp"
#include "audiodiv/rng.hpp"
#include "audiodiv/tensor_io.hpp"
#include "audiodiv/wav.hpp"

namespace audiodiv {

namespace fs = std::filesystem;

inline std::vector<double> default_noise_sigmas() {
  return {0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16, 0.18, 0.2};
}

inline std::vector<double> default_perturb_probs() {
  return {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
}

namespace detail {

inline void require_ladder_params(const std::vector<double>& v, const char* what, bool unit_interval) {
  if (v.size() < 2) throw DomainError(std::string(what) + ": a ladder needs at least 2 levels");
  if (v.front() != 0.0) throw DomainError(std::string(what) + ": the first level must be 0");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) throw DomainError(std::string(what) + ": values must be strictly increasing");
  }
  if (unit_interval && v.back() > 1.0) throw DomainError(std::string(what) + ": probabilities must lie in [0, 1]");
}

}  // namespace detail

struct NoiseLadderSpec {
  std::vector<double> sigmas = default_noise_sigmas();
  std::uint64_t seed = 0;

  void validate() const { detail::require_ladder_params(sigmas, "noise ladder", false); }
};

struct MidiPerturbSpec {
  std::vector<double> probs = default_perturb_probs();
  int pitch_range = 6;        ///< semitones, symmetric
  double time_range = 0.2;    ///< seconds, symmetric
  double min_duration = 0.01; ///< seconds
  std::uint64_t seed = 0;

  void validate() const { detail::require_ladder_params(probs, "MIDI ladder", true); }
};

/// out[t] = in[t] + sigma * eps_t, eps iid standard normal from a stream
/// seeded with `seed`. No clipping.
inline std::vector<double> add_noise(std::span<const double> samples, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw DomainError("noise sigma must be >= 0");
  std::vector<double> out(samples.begin(), samples.end());
  if (sigma == 0.0) return out;
  Rng rng(seed);
  std::normal_distribution<double> eps(0.0, 1.0);
  for (double& s : out) s += sigma * eps(rng);
  return out;
}

struct PerturbStats {
  std::size_t notes = 0;
  std::size_t selected = 0;
};

/// Independently selects each note with probability `prob` and shifts
/// selected notes in pitch (uniform integer in [-range, range]) and in
/// onset/offset (independent uniform seconds in [-time_range, time_range]).
/// Note `i` draws from the stream derive_seed(seed, {i}).
inline MidiFile perturb_midi(const MidiFile& in, double prob, const MidiPerturbSpec& spec, std::uint64_t seed,
                             PerturbStats* stats = nullptr) {
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("perturbation probability must lie in [0, 1]");
  const std::vector<MidiNote> notes = extract_notes(in);
  const TempoMap tempo(in);
  MidiFile out = in;
  PerturbStats st;
  st.notes = notes.size();
  std::vector<char> touched(out.tracks.size(), 0);
  for (std::size_t i = 0; i < notes.size(); ++i) {
    Rng rng = keyed_rng(seed, {static_cast<std::uint64_t>(i)});
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (!(unit(rng) < prob)) continue;
    ++st.selected;
    std::uniform_int_distribution<int> pitch_shift(-spec.pitch_range, spec.pitch_range);
    std::uniform_real_distribution<double> time_shift(-spec.time_range, spec.time_range);
    const int dp = pitch_shift(rng);
    const double d_on = time_shift(rng);
    const double d_off = time_shift(rng);

    const MidiNote& n = notes[i];
    const int pitch = std::clamp(n.pitch + dp, 0, 127);
    const double on_sec = std::max(0.0, tempo.seconds(n.on_tick) + d_on);
    const double off_sec = std::max(tempo.seconds(n.off_tick) + d_off, on_sec + spec.min_duration);
    const auto on_tick = static_cast<std::uint64_t>(std::llround(tempo.ticks(on_sec)));
    const auto min_off = static_cast<std::uint64_t>(
        std::ceil(tempo.ticks(tempo.seconds(on_tick) + spec.min_duration) - 1e-9));
    auto off_tick = std::max(static_cast<std::uint64_t>(std::llround(tempo.ticks(off_sec))), min_off);
    if (off_tick <= on_tick) off_tick = on_tick + 1;

    auto& events = out.tracks[n.track].events;
    events[n.on_event].tick = on_tick;
    events[n.on_event].bytes[1] = static_cast<std::uint8_t>(pitch);
    events[n.off_event].tick = off_tick;
    events[n.off_event].bytes[1] = static_cast<std::uint8_t>(pitch);
    touched[n.track] = 1;
  }
  for (std::size_t t = 0; t < out.tracks.size(); ++t) {
    if (!touched[t]) continue;
    auto& events = out.tracks[t].events;
    std::vector<MidiEvent> eot;
    std::erase_if(events, [&](const MidiEvent& e) {
      if (e.is_end_of_track()) {
        eot.push_back(e);
        return true;
      }
      return false;
    });
    std::stable_sort(events.begin(), events.end(), [](const MidiEvent& a, const MidiEvent& b) { return a.tick < b.tick; });
    const std::uint64_t last = events.empty() ? 0 : events.back().tick;
    for (auto& e : eot) {
      e.tick = std::max(e.tick, last);
      events.push_back(std::move(e));
    }
  }
  if (stats) *stats = st;
  return out;
}

// ---------------------------------------------------------------------------
// Ladder generation

struct LadderLevel {
  int index = 0;
  double param = 0.0;
  std::string dir;
};

struct LadderManifest {
  std::string kind;  ///< "noise" or "midi"
  std::vector<LadderLevel> levels;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const {
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& l : levels) lv.push_back({{"index", l.index}, {"param", l.param}, {"dir", l.dir}});
    nlohmann::json j = {{"kind", kind}, {"levels", lv}, {"seed", seed}};
    if (kind == "noise") j["noise_channels"] = "independent";
    return j;
  }
};

namespace detail {

inline std::vector<fs::path> list_inputs(const fs::path& dir, std::initializer_list<std::string_view> exts) {
  if (!fs::is_directory(dir)) throw IoError("input directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (std::find(exts.begin(), exts.end(), ext) != exts.end()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("input directory '" + dir.string() + "' has no usable files");
  return files;
}

inline std::string level_dir_name(std::size_t level) {
  std::ostringstream s;
  s << "level_" << std::setw(2) << std::setfill('0') << level;
  return s.str();
}

template <typename Transform>
LadderManifest build_ladder(const fs::path& input_dir, const fs::path& output_root, const std::string& kind,
                            const std::vector<double>& params, std::uint64_t seed,
                            std::initializer_list<std::string_view> exts, Transform&& transform) {
  const auto inputs = list_inputs(input_dir, exts);
  LadderManifest manifest;
  manifest.kind = kind;
  manifest.seed = seed;
  fs::create_directories(output_root);
  for (std::size_t level = 1; level <= params.size(); ++level) {
    const std::string dir = level_dir_name(level);
    fs::create_directories(output_root / dir);
    manifest.levels.push_back({static_cast<int>(level), params[level - 1], dir});
    parallel_for(inputs.size(), [&](std::size_t clip) {
      const fs::path& src = inputs[clip];
      const fs::path dst = output_root / dir / src.filename();
      try {
        const std::string bytes = read_file_bytes(src);
        // The zero rung is the identity: copy the bytes through untouched.
        if (params[level - 1] == 0.0) {
          write_file_bytes(dst, bytes);
        } else {
          write_file_bytes(dst, transform(bytes, src.string(), params[level - 1],
                                          derive_seed(seed, {level, clip})));
        }
      } catch (const DataFault& e) {
        throw DataError("clip '" + src.filename().string() + "' (level " + std::to_string(level) + "): " + e.what());
      }
    }, 1);
  }
  write_file_bytes(output_root / "ladder.json", manifest.to_json().dump(2) + "\n");
  return manifest;
}

}  // namespace detail

/// Writes output_root/level_XX/<clip>.wav for every sigma plus
/// output_root/ladder.json.
inline LadderManifest build_noise_ladder(const fs::path& input_dir, const NoiseLadderSpec& spec,
                                         const fs::path& output_root) {
  spec.validate();
  return detail::build_ladder(input_dir, output_root, "noise", spec.sigmas, spec.seed, {".wav"},
                              [](const std::string& bytes, const std::string& where, double sigma, std::uint64_t key) {
                                WavAudio w = decode_wav(bytes, where);
                                w.samples = add_noise(w.samples, sigma, key);
                                return encode_wav(w);
                              });
}

inline LadderManifest build_midi_ladder(const fs::path& input_dir, const MidiPerturbSpec& spec,
                                        const fs::path& output_root) {
  spec.validate();
  return detail::build_ladder(input_dir, output_root, "midi", spec.probs, spec.seed, {".mid", ".midi"},
                              [&spec](const std::string& bytes, const std::string& where, double prob, std::uint64_t key) {
                                return encode_midi(perturb_midi(decode_midi(bytes, where), prob, spec, key));
                              });
}

}  // namespace audiodiv
