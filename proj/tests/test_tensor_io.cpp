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

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "audiodiv/tensor_io.hpp"
#include "test_util.hpp"

namespace audiodiv {
namespace {

using testing::TempDir;

// Hand-assembled NPY bytes, independent of encode_npy.
std::string npy_bytes(const std::string& dict, const std::string& payload) {
  std::string header = dict;
  while ((10 + header.size() + 1) % 64 != 0) header += ' ';
  header += '\n';
  std::string out = "\x93NUMPY";
  out += '\x01';
  out += '\x00';
  out += static_cast<char>(header.size() & 0xFF);
  out += static_cast<char>(header.size() >> 8);
  return out + header + payload;
}

template <typename T>
std::string raw(std::initializer_list<T> values) {
  std::string out;
  for (T v : values) out.append(reinterpret_cast<const char*>(&v), sizeof v);
  return out;
}

TEST(Npy, Decodes2x2Float64) {
  const Matrix m = decode_npy(
      npy_bytes("{'descr': '<f8', 'fortran_order': False, 'shape': (2, 2), }", raw<double>({1, 2, 3, 4})));
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 2);
  EXPECT_EQ(m(0, 0), 1);
  EXPECT_EQ(m(0, 1), 2);
  EXPECT_EQ(m(1, 0), 3);
  EXPECT_EQ(m(1, 1), 4);
}

TEST(Npy, OneDimensionalBecomesSingleFrame) {
  TempDir dir;
  detail::write_file_bytes(dir / "v.npy",
                           npy_bytes("{'descr': '<f8', 'fortran_order': False, 'shape': (2,), }", raw<double>({0.5, -0.5})));
  const FrameSequence s = load_tensor(dir / "v.npy");
  EXPECT_EQ(s.frames(), 1);
  EXPECT_EQ(s.dim(), 2);
  EXPECT_EQ(s.data()(0, 1), -0.5);
}

TEST(Npy, Float32IsWidenedExactly) {
  const float a = 0.1f, b = -3.25f;
  const Matrix m = decode_npy(
      npy_bytes("{'descr': '<f4', 'fortran_order': False, 'shape': (1, 2), }", raw<float>({a, b})));
  EXPECT_EQ(m(0, 0), static_cast<double>(a));
  EXPECT_EQ(m(0, 1), static_cast<double>(b));
}

TEST(Npy, RejectsMalformedInputs) {
  const std::string body = raw<double>({1, 2});
  EXPECT_THROW(decode_npy("not an npy file at all"), FormatError);
  EXPECT_THROW(decode_npy(npy_bytes("{'descr': '<f8', 'fortran_order': True, 'shape': (1, 2), }", body)),
               FormatError);
  EXPECT_THROW(decode_npy(npy_bytes("{'descr': '<i4', 'fortran_order': False, 'shape': (1, 2), }", body)),
               FormatError);
  EXPECT_THROW(decode_npy(npy_bytes("{'descr': '<f8', 'fortran_order': False, 'shape': (1, 1, 2), }", body)),
               FormatError);
  EXPECT_THROW(decode_npy(npy_bytes("{'descr': '<f8', 'fortran_order': False, 'shape': (2, 2), }", body)),
               FormatError);
  std::string v2 = npy_bytes("{'descr': '<f8', 'fortran_order': False, 'shape': (1, 2), }", body);
  v2[6] = 2;
  EXPECT_THROW(decode_npy(v2), FormatError);
}

TEST(Npy, RejectsNonFinite) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(decode_npy(npy_bytes("{'descr': '<f8', 'fortran_order': False, 'shape': (1, 2), }",
                                            raw<double>({1.0, nan}))),
               DataError);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(decode_npy(npy_bytes("{'descr': '<f8', 'fortran_order': False, 'shape': (2,), }",
                                            raw<double>({inf, 1.0}))),
               DataError);
}

TEST(Npy, SaveWritesMagicAndShape) {
  TempDir dir;
  save_tensor(FrameSequence(Matrix::Zero(1, 1), "z"), dir / "z.npy");
  const std::string bytes = detail::read_file_bytes(dir / "z.npy");
  EXPECT_EQ(bytes.substr(0, 6), std::string("\x93NUMPY"));
  EXPECT_EQ(bytes[6], '\x01');
  EXPECT_EQ(bytes[7], '\x00');
  EXPECT_NE(bytes.find("(1, 1)"), std::string::npos);
  EXPECT_NE(bytes.find("'<f8'"), std::string::npos);
  const std::size_t header_len = static_cast<unsigned char>(bytes[8]) | (static_cast<unsigned char>(bytes[9]) << 8);
  EXPECT_EQ((10 + header_len) % 64, 0u);
}

TEST(Npy, RoundTripIsBitExact) {
  TempDir dir;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Matrix m = testing::gaussian(100, 32, seed, 1e3);
    m(0, 0) = std::numeric_limits<double>::denorm_min();
    m(1, 1) = -0.0;
    save_tensor(FrameSequence(m, "r"), dir / "r.npy");
    const FrameSequence back = load_tensor(dir / "r.npy");
    ASSERT_EQ(back.data().rows(), m.rows());
    ASSERT_EQ(back.data().cols(), m.cols());
    EXPECT_EQ(std::memcmp(back.data().data(), m.data(), sizeof(double) * static_cast<std::size_t>(m.size())), 0);
    // File -> load -> save reproduces the file.
    const std::string first = detail::read_file_bytes(dir / "r.npy");
    save_tensor(back, dir / "r2.npy");
    EXPECT_EQ(first, detail::read_file_bytes(dir / "r2.npy"));
  }
}

TEST(Npy, MissingFileIsIoError) { EXPECT_THROW(load_tensor("/nonexistent/definitely/missing.npy"), IoError); }

TEST(Pool, Examples) {
  Matrix m(2, 2);
  m << 1, 5, 3, 2;
  const FrameSequence s(m, "c");
  EXPECT_EQ(pool(s, PoolMethod::kMax), (Vector(2) << 3, 5).finished());
  EXPECT_EQ(pool(s, PoolMethod::kMean), (Vector(2) << 2, 3.5).finished());
  EXPECT_EQ(pool(s, PoolMethod::kFirst), (Vector(2) << 1, 5).finished());
  EXPECT_EQ(pool(s, PoolMethod::kLast), (Vector(2) << 3, 2).finished());
}

TEST(Pool, SingleFrameAllMethodsAgree) {
  const FrameSequence s(testing::gaussian(1, 7, 3), "one");
  const Vector ref = pool(s, PoolMethod::kMax);
  for (PoolMethod p : {PoolMethod::kMean, PoolMethod::kFirst, PoolMethod::kLast}) EXPECT_EQ(pool(s, p), ref);
}

TEST(Pool, OrderingAndPermutationProperties) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix m = testing::gaussian(2 + static_cast<Eigen::Index>(seed), 5, seed);
    const FrameSequence s(m, "p");
    const Vector mx = pool(s, PoolMethod::kMax), mean = pool(s, PoolMethod::kMean);
    const Vector mn = m.colwise().minCoeff().transpose();
    EXPECT_TRUE(((mx.array() - mean.array()) >= -1e-12).all());
    EXPECT_TRUE(((mean.array() - mn.array()) >= -1e-12).all());

    const FrameSequence rev(m.colwise().reverse().eval(), "r");
    EXPECT_EQ(pool(rev, PoolMethod::kMax), mx);
    EXPECT_LT((pool(rev, PoolMethod::kMean) - mean).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(pool(rev, PoolMethod::kFirst), pool(s, PoolMethod::kLast));
    EXPECT_NE(pool(rev, PoolMethod::kFirst), pool(s, PoolMethod::kFirst));
  }
}

TEST(Pool, ParseNames) {
  EXPECT_EQ(parse_pool_method("max"), PoolMethod::kMax);
  EXPECT_EQ(parse_pool_method("first"), PoolMethod::kFirst);
  EXPECT_THROW(parse_pool_method("median"), DomainError);
}

TEST(FrameSequence, Invariants) {
  EXPECT_THROW(FrameSequence(Matrix(0, 3), "e"), DataError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(FrameSequence(bad, "b"), DataError);
  EXPECT_THROW(EmbeddingSet(Matrix::Zero(1, 3)), InsufficientData);
}

class ManifestTest : public ::testing::Test {
 protected:
  void write_clip(const std::string& name, const Matrix& m) { save_tensor(FrameSequence(m, name), dir_ / name); }

  void write_manifest(const std::string& text) {
    std::ofstream(dir_ / "manifest.json") << text;
  }

  TempDir dir_;
};

TEST_F(ManifestTest, ThreeSingleFrameClipsConcatenate) {
  const Matrix all = testing::gaussian(3, 4, 9);
  for (int i = 0; i < 3; ++i) write_clip("c" + std::to_string(i) + ".npy", all.row(i));
  write_manifest(R"({"dimension": 4, "entries": [
    {"clip_id": "a", "path": "c0.npy", "level": null, "system": null},
    {"clip_id": "b", "path": "c1.npy", "level": 1, "system": "sys"},
    {"clip_id": "c", "path": "c2.npy"}]})");
  const Manifest m = load_manifest(dir_ / "manifest.json");
  ASSERT_EQ(m.entries.size(), 3u);
  EXPECT_EQ(m.entries[1].level, 1);
  EXPECT_EQ(m.entries[1].system, "sys");
  EXPECT_FALSE(m.entries[0].level.has_value());
  for (PoolMethod p : {PoolMethod::kMax, PoolMethod::kMean, PoolMethod::kFirst, PoolMethod::kLast}) {
    const EmbeddingSet s = assemble_set(m, p, Role::kReference, "r");
    EXPECT_EQ(s.data(), all);
  }
}

TEST_F(ManifestTest, PoolingMethodsDifferOnMultiFrameClips) {
  Matrix a(2, 2), b(3, 2);
  a << 0, 1, 2, -1;
  b << 5, 5, 1, 0, 0, 9;
  write_clip("a.npy", a);
  write_clip("b.npy", b);
  write_manifest(R"({"dimension": 2, "entries": [{"clip_id": "a", "path": "a.npy"}, {"clip_id": "b", "path": "b.npy"}]})");
  const Manifest m = load_manifest(dir_ / "manifest.json");
  const Matrix mx = assemble_set(m, PoolMethod::kMax, Role::kCandidate, "g").data();
  const Matrix mean = assemble_set(m, PoolMethod::kMean, Role::kCandidate, "g").data();
  EXPECT_NE(mx, mean);
  EXPECT_EQ(mx.rows(), 2);
  EXPECT_EQ(mx.cols(), 2);
  EXPECT_EQ(mx.row(1), (Eigen::RowVector2d(5, 9)));
}

TEST_F(ManifestTest, MissingFileNamesClip) {
  write_clip("a.npy", Matrix::Ones(1, 2));
  write_manifest(R"({"dimension": 2, "entries": [{"clip_id": "present", "path": "a.npy"},
                                                   {"clip_id": "ghost_clip", "path": "nope.npy"}]})");
  try {
    load_manifest(dir_ / "manifest.json");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost_clip"), std::string::npos);
  }
}

TEST_F(ManifestTest, DuplicateIdsAndDimensionMismatch) {
  write_clip("a.npy", Matrix::Ones(1, 2));
  write_clip("b.npy", Matrix::Ones(1, 3));
  write_manifest(R"({"dimension": 2, "entries": [{"clip_id": "x", "path": "a.npy"}, {"clip_id": "x", "path": "a.npy"}]})");
  EXPECT_THROW(load_manifest(dir_ / "manifest.json"), DataFault);
  write_manifest(R"({"dimension": 2, "entries": [{"clip_id": "x", "path": "a.npy"}, {"clip_id": "y", "path": "b.npy"}]})");
  const Manifest m = load_manifest(dir_ / "manifest.json");
  try {
    assemble_set(m, PoolMethod::kMean, Role::kCandidate, "g");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("'y'"), std::string::npos);
  }
}

TEST_F(ManifestTest, CorruptEntryNamesClip) {
  write_clip("a.npy", Matrix::Ones(1, 2));
  detail::write_file_bytes(dir_ / "bad.npy", "garbage");
  write_manifest(R"({"dimension": 2, "entries": [{"clip_id": "ok", "path": "a.npy"}, {"clip_id": "broken", "path": "bad.npy"}]})");
  const Manifest m = load_manifest(dir_ / "manifest.json");
  try {
    assemble_set(m, PoolMethod::kMean, Role::kCandidate, "g");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("broken"), std::string::npos);
  }
}

TEST_F(ManifestTest, RowOrderFollowsManifestUnderThreads) {
  const Matrix all = testing::gaussian(40, 3, 2);
  std::string entries;
  for (int i = 39; i >= 0; --i) {
    write_clip("c" + std::to_string(i) + ".npy", all.row(i));
    entries += std::string(entries.empty() ? "" : ",") + R"({"clip_id": "id)" + std::to_string(i) + R"(", "path": "c)" +
               std::to_string(i) + R"(.npy"})";
  }
  write_manifest(R"({"dimension": 3, "entries": [)" + entries + "]}");
  set_num_threads(4);
  const EmbeddingSet s = assemble_set(load_manifest(dir_ / "manifest.json"), PoolMethod::kMean, Role::kReference, "r");
  set_num_threads(0);
  EXPECT_EQ(s.data(), all.colwise().reverse().eval());
}

}  // namespace
}  // namespace audiodiv
