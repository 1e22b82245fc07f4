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

// Embedding tensors: NPY v1.0 reading/writing, temporal pooling, and
// manifest-driven assembly of embedding sets.

#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "audiodiv/common.hpp"
#include "audiodiv/parallel.hpp"

namespace audiodiv {

namespace fs = std::filesystem;

namespace detail {

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace detail

/// Per-time activations of one clip: T frames by d dimensions.
class FrameSequence {
 public:
  FrameSequence(Matrix data, std::string clip_id = {})
      : data_(std::move(data)), clip_id_(std::move(clip_id)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
      throw DataError("frame sequence '" + clip_id_ + "' must have T >= 1 and d >= 1");
    }
    if (!detail::all_finite(data_)) {
      throw DataError("frame sequence '" + clip_id_ + "' contains non-finite values");
    }
  }

  const Matrix& data() const { return data_; }
  const std::string& clip_id() const { return clip_id_; }
  Eigen::Index frames() const { return data_.rows(); }
  Eigen::Index dim() const { return data_.cols(); }

 private:
  Matrix data_;
  std::string clip_id_;
};

enum class Role { kReference, kCandidate };

inline std::string_view to_string(Role r) {
  return r == Role::kReference ? "reference" : "candidate";
}

/// N pooled clip embeddings (rows) of dimension d.
class EmbeddingSet {
 public:
  EmbeddingSet(Matrix data, Role role = Role::kCandidate, std::string label = {})
      : data_(std::move(data)), role_(role), label_(std::move(label)) {
    if (data_.rows() < 2) {
      throw InsufficientData("embedding set '" + label_ + "' needs at least 2 rows, got " +
                             std::to_string(data_.rows()));
    }
    if (data_.cols() < 1) throw DataError("embedding set '" + label_ + "' has zero dimension");
    if (!detail::all_finite(data_)) {
      throw DataError("embedding set '" + label_ + "' contains non-finite values");
    }
  }

  const Matrix& data() const { return data_; }
  Role role() const { return role_; }
  const std::string& label() const { return label_; }
  Eigen::Index size() const { return data_.rows(); }
  Eigen::Index dim() const { return data_.cols(); }

  EmbeddingSet with_role(Role role, std::string label) const {
    return EmbeddingSet(data_, role, std::move(label));
  }

 private:
  Matrix data_;
  Role role_;
  std::string label_;
};

// ---------------------------------------------------------------------------
// NPY v1.0

namespace detail {

inline constexpr char kNpyMagic[] = "\x93NUMPY";
inline constexpr std::size_t kNpyMagicLen = 6;

struct NpyHeader {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::int64_t> shape;
};

inline NpyHeader parse_npy_header(const std::string& text, const std::string& where) {
  NpyHeader h;
  std::smatch m;
  static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
  static const std::regex fortran_re(R"('fortran_order'\s*:\s*(True|False))");
  static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
  if (!std::regex_search(text, m, descr_re)) throw FormatError(where + ": header lacks 'descr'");
  h.descr = m[1];
  if (!std::regex_search(text, m, fortran_re)) {
    throw FormatError(where + ": header lacks 'fortran_order'");
  }
  h.fortran_order = m[1] == "True";
  if (!std::regex_search(text, m, shape_re)) throw FormatError(where + ": header lacks 'shape'");
  std::string dims = m[1];
  std::stringstream ss(dims);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), [](unsigned char c) { return std::isspace(c); }),
              tok.end());
    if (tok.empty()) continue;
    if (!std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); })) {
      throw FormatError(where + ": malformed shape entry '" + tok + "'");
    }
    h.shape.push_back(std::stoll(tok));
  }
  return h;
}

template <typename T>
T from_little_endian(const char* bytes) {
  T value;
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(&value, bytes, sizeof(T));
  } else {
    char tmp[sizeof(T)];
    std::reverse_copy(bytes, bytes + sizeof(T), tmp);
    std::memcpy(&value, tmp, sizeof(T));
  }
  return value;
}

template <typename T>
void append_little_endian(std::string& out, T value) {
  char tmp[sizeof(T)];
  std::memcpy(tmp, &value, sizeof(T));
  if constexpr (std::endian::native != std::endian::little) std::reverse(tmp, tmp + sizeof(T));
  out.append(tmp, sizeof(T));
}

inline std::string read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return std::move(buf).str();
}

inline void write_file_bytes(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace detail

/// Decodes an in-memory NPY v1.0 image holding a 1-D or 2-D float array.
inline Matrix decode_npy(std::string_view bytes, const std::string& where = "<npy>") {
  using namespace detail;
  if (bytes.size() < 10 || bytes.substr(0, kNpyMagicLen) != std::string_view(kNpyMagic, kNpyMagicLen)) {
    throw FormatError(where + ": bad NPY magic");
  }
  if (static_cast<unsigned char>(bytes[6]) != 1 || static_cast<unsigned char>(bytes[7]) != 0) {
    throw FormatError(where + ": only NPY version 1.0 is supported");
  }
  const std::size_t header_len = from_little_endian<std::uint16_t>(bytes.data() + 8);
  if (bytes.size() < 10 + header_len) throw FormatError(where + ": truncated NPY header");
  NpyHeader h = parse_npy_header(std::string(bytes.substr(10, header_len)), where);
  if (h.fortran_order) throw FormatError(where + ": Fortran-ordered arrays are not supported");
  std::size_t item = 0;
  if (h.descr == "<f8") {
    item = 8;
  } else if (h.descr == "<f4") {
    item = 4;
  } else {
    throw FormatError(where + ": unsupported dtype '" + h.descr + "' (expected <f4 or <f8)");
  }
  std::int64_t rows = 0, cols = 0;
  if (h.shape.size() == 1) {
    rows = 1;
    cols = h.shape[0];
  } else if (h.shape.size() == 2) {
    rows = h.shape[0];
    cols = h.shape[1];
  } else {
    throw FormatError(where + ": unsupported rank " + std::to_string(h.shape.size()));
  }
  if (rows < 1 || cols < 1) throw FormatError(where + ": empty array");
  const std::size_t count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  const std::size_t offset = 10 + header_len;
  if (bytes.size() - offset < count * item) throw FormatError(where + ": truncated NPY data");
  Matrix m(rows, cols);
  const char* p = bytes.data() + offset;
  double* out = m.data();
  for (std::size_t i = 0; i < count; ++i, p += item) {
    out[i] = item == 8 ? from_little_endian<double>(p)
                       : static_cast<double>(from_little_endian<float>(p));
  }
  if (!m.allFinite()) throw DataError(where + ": non-finite entries");
  return m;
}

/// Encodes a matrix as NPY v1.0 with "<f8" little-endian data in C order.
inline std::string encode_npy(const Matrix& m) {
  std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                     std::to_string(m.rows()) + ", " + std::to_string(m.cols()) + "), }";
  // Magic (6) + version (2) + length (2) + dict + padding + '\n' aligned to 64.
  std::size_t total = 10 + dict.size() + 1;
  dict.append((64 - total % 64) % 64, ' ');
  dict.push_back('\n');
  std::string out(detail::kNpyMagic, detail::kNpyMagicLen);
  out.push_back('\x01');
  out.push_back('\x00');
  detail::append_little_endian(out, static_cast<std::uint16_t>(dict.size()));
  out += dict;
  out.reserve(out.size() + static_cast<std::size_t>(m.size()) * 8);
  for (Eigen::Index i = 0; i < m.size(); ++i) detail::append_little_endian(out, m.data()[i]);
  return out;
}

inline FrameSequence load_tensor(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("no such file '" + path.string() + "'");
  std::string bytes = detail::read_file_bytes(path);
  return FrameSequence(decode_npy(bytes, path.string()), path.stem().string());
}

inline void save_tensor(const FrameSequence& seq, const fs::path& path) {
  detail::write_file_bytes(path, encode_npy(seq.data()));
}

inline void save_matrix(const Matrix& m, const fs::path& path) {
  detail::write_file_bytes(path, encode_npy(m));
}

// ---------------------------------------------------------------------------
// Pooling

enum class PoolMethod { kMax, kMean, kLast, kFirst };

inline std::string_view to_string(PoolMethod p) {
  switch (p) {
    case PoolMethod::kMax: return "max";
    case PoolMethod::kMean: return "mean";
    case PoolMethod::kLast: return "last";
    case PoolMethod::kFirst: return "first";
  }
  return "?";
}

inline PoolMethod parse_pool_method(std::string_view s) {
  if (s == "max") return PoolMethod::kMax;
  if (s == "mean") return PoolMethod::kMean;
  if (s == "last") return PoolMethod::kLast;
  if (s == "first") return PoolMethod::kFirst;
  throw DomainError("unknown pooling method '" + std::string(s) + "'");
}

inline Vector pool(const FrameSequence& seq, PoolMethod method) {
  const Matrix& x = seq.data();
  switch (method) {
    case PoolMethod::kMax: return x.colwise().maxCoeff().transpose();
    case PoolMethod::kMean: return x.colwise().mean().transpose();
    case PoolMethod::kLast: return x.row(x.rows() - 1).transpose();
    case PoolMethod::kFirst: return x.row(0).transpose();
  }
  throw DomainError("unknown pooling method");
}

// ---------------------------------------------------------------------------
// Manifests

struct ManifestEntry {
  std::string clip_id;
  fs::path path;
  std::optional<int> level;
  std::optional<std::string> system;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  Eigen::Index dimension = 0;
};

inline void validate_manifest(const Manifest& m, bool check_files = true) {
  if (m.dimension < 1) throw DataError("manifest dimension must be >= 1");
  std::set<std::string> seen;
  for (const auto& e : m.entries) {
    if (!seen.insert(e.clip_id).second) throw DataError("duplicate clip_id '" + e.clip_id + "'");
    if (check_files && !fs::exists(e.path)) {
      throw IoError("clip '" + e.clip_id + "': missing file '" + e.path.string() + "'");
    }
  }
}

/// Reads a manifest JSON file. Relative entry paths resolve against the
/// manifest's own directory.
inline Manifest load_manifest(const fs::path& path, bool check_files = true) {
  std::string text = detail::read_file_bytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  Manifest m;
  try {
    m.dimension = j.at("dimension").get<Eigen::Index>();
    const fs::path base = path.parent_path();
    for (const auto& e : j.at("entries")) {
      ManifestEntry entry;
      entry.clip_id = e.at("clip_id").get<std::string>();
      fs::path p = e.at("path").get<std::string>();
      entry.path = p.is_absolute() ? p : base / p;
      if (e.contains("level") && !e["level"].is_null()) entry.level = e["level"].get<int>();
      if (e.contains("system") && !e["system"].is_null()) entry.system = e["system"].get<std::string>();
      m.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed manifest: " + e.what());
  }
  validate_manifest(m, check_files);
  return m;
}

inline nlohmann::json manifest_to_json(const Manifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"clip_id", e.clip_id},
                       {"path", e.path.generic_string()},
                       {"level", e.level ? nlohmann::json(*e.level) : nlohmann::json(nullptr)},
                       {"system", e.system ? nlohmann::json(*e.system) : nlohmann::json(nullptr)}});
  }
  return {{"dimension", m.dimension}, {"entries", entries}};
}

namespace detail {

template <typename E>
[[noreturn]] void rethrow_as(const E&, const std::string& message) {
  throw E(message);
}

[[noreturn]] inline void rethrow_with_clip(const std::string& clip_id) {
  const std::string prefix = "clip '" + clip_id + "': ";
  try {
    throw;
  } catch (const FormatError& e) {
    rethrow_as(e, prefix + e.what());
  } catch (const IoError& e) {
    rethrow_as(e, prefix + e.what());
  } catch (const DataError& e) {
    rethrow_as(e, prefix + e.what());
  }
}

}  // namespace detail

/// Loads and pools every manifest entry; row i is entry i.
inline EmbeddingSet assemble_set(const Manifest& manifest, PoolMethod method, Role role,
                                 std::string label) {
  validate_manifest(manifest, /*check_files=*/false);
  const auto n = static_cast<Eigen::Index>(manifest.entries.size());
  Matrix out(n, manifest.dimension);
  parallel_for(manifest.entries.size(), [&](std::size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    try {
      FrameSequence seq = load_tensor(e.path);
      if (seq.dim() != manifest.dimension) {
        throw DataError("dimension " + std::to_string(seq.dim()) + " != declared " +
                        std::to_string(manifest.dimension));
      }
      out.row(static_cast<Eigen::Index>(i)) = pool(seq, method).transpose();
    } catch (const DataFault&) {
      detail::rethrow_with_clip(e.clip_id);
    }
  }, 8);
  return EmbeddingSet(std::move(out), role, std::move(label));
}

/// Loads an embedding set from either a manifest (.json, pooled with
/// `method`) or a pre-pooled 2-D NPY matrix whose rows are clips.
inline EmbeddingSet load_embedding_set(const fs::path& path, PoolMethod method, Role role,
                                       std::string label) {
  if (path.extension() == ".json") {
    return assemble_set(load_manifest(path), method, role, std::move(label));
  }
  FrameSequence seq = load_tensor(path);
  return EmbeddingSet(seq.data(), role, std::move(label));
}

}  // namespace audiodiv
