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

#include <algorithm>
#include <array>
#include <cmath>

#include "audiodiv/knn_prdc.hpp"
#include "prdc_oracle.hpp"
#include "test_util.hpp"

namespace audiodiv {
namespace {

using testing::brute_prdc;
using testing::brute_radii;

void expect_same(const PrdcResult& a, const PrdcResult& b) {
  EXPECT_EQ(a.precision, b.precision);
  EXPECT_EQ(a.recall, b.recall);
  EXPECT_EQ(a.density, b.density);
  EXPECT_EQ(a.coverage, b.coverage);
  EXPECT_EQ(a.k, b.k);
}

TEST(KnnRadii, LineExample) {
  Matrix s(3, 1);
  s << 0, 1, 3;
  EXPECT_EQ(knn_radii(s, 1), (std::vector<double>{1, 1, 2}));
}

TEST(KnnRadii, DuplicatesHaveZeroRadius) {
  Matrix s(4, 2);
  s << 1, 1, 1, 1, 5, 5, 5, 5;
  EXPECT_EQ(knn_radii(s, 1), (std::vector<double>{0, 0, 0, 0}));
}

TEST(KnnRadii, GridInteriorPointsHaveSpacingRadius) {
  Matrix g(100, 2);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) g.row(i * 10 + j) << 0.5 * i, 0.5 * j;
  const auto r = knn_radii(g, 4);
  EXPECT_EQ(r, brute_radii(g, 4));
  for (int i = 1; i < 9; ++i)
    for (int j = 1; j < 9; ++j) EXPECT_EQ(r[static_cast<std::size_t>(i * 10 + j)], 0.5);
}

TEST(KnnRadii, KOutOfRange) {
  const Matrix s = testing::gaussian(5, 2, 1);
  EXPECT_THROW(knn_radii(s, 5), DomainError);
  EXPECT_THROW(knn_radii(s, 0), DomainError);
}

TEST(Prdc, IdenticalSets) {
  const Matrix x = testing::gaussian(50, 3, 1);
  const PrdcResult r = prdc(x, x, 2);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.coverage, 1.0);
}

TEST(Prdc, FarOutsideSupport) {
  const Matrix x = testing::gaussian(40, 3, 1);
  const Matrix y = (testing::gaussian(40, 3, 2).array() + 1e3).matrix();
  const PrdcResult r = prdc(x, y, 3);
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(r.density, 0.0);
  EXPECT_EQ(r.coverage, 0.0);
}

TEST(Prdc, MatchesBruteForce200) {
  const Matrix x = testing::gaussian(200, 4, 7);
  const Matrix y = (testing::gaussian(200, 4, 8, 1.2).array() + 0.3).matrix();
  expect_same(prdc(x, y, 5), brute_prdc(x, y, 5));
}

TEST(Prdc, MatchesBruteForceAcrossInstances) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Eigen::Index n = std::uniform_int_distribution<Eigen::Index>(10, 300)(rng);
    const Eigen::Index m = std::uniform_int_distribution<Eigen::Index>(10, 300)(rng);
    const Eigen::Index d = std::uniform_int_distribution<Eigen::Index>(1, 8)(rng);
    const int k = std::array<int, 3>{1, 3, 5}[seed % 3];
    const Matrix x = testing::gaussian(n, d, 1000 + seed);
    const Matrix y = testing::gaussian(m, d, 2000 + seed, 1.5);
    expect_same(prdc(x, y, k), brute_prdc(x, y, k));
  }
}

TEST(Prdc, SwapExchangesPrecisionAndRecall) {
  const Matrix x = testing::gaussian(120, 3, 1);
  const Matrix y = testing::gaussian(90, 3, 2, 1.4);
  const PrdcResult a = prdc(x, y, 4), b = prdc(y, x, 4);
  EXPECT_EQ(a.precision, b.recall);
  EXPECT_EQ(a.recall, b.precision);
}

TEST(Prdc, DuplicatingGeneratedPoints) {
  const Matrix x = testing::gaussian(80, 3, 3);
  const Matrix y = testing::gaussian(70, 3, 4, 1.3);
  Matrix yy(140, 3);
  yy << y, y;
  const PrdcResult a = prdc(x, y, 3), b = prdc(x, yy, 3);
  EXPECT_EQ(a.precision, b.precision);
  EXPECT_EQ(a.density, b.density);
  EXPECT_EQ(a.coverage, b.coverage);
  EXPECT_EQ(b.recall, brute_prdc(x, yy, 3).recall);
}

TEST(Prdc, RangesAndKValidation) {
  const Matrix x = testing::gaussian(30, 2, 1), y = testing::gaussian(6, 2, 2);
  EXPECT_THROW(prdc(x, y, 6), DomainError);
  EXPECT_THROW(prdc(x, y, 0), DomainError);
  const PrdcResult r = prdc(x, y, 5);
  for (double v : {r.precision, r.recall, r.coverage}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_GE(r.density, 0.0);
}

TEST(Prdc, ScoreWrapperIsHigherBetter) {
  const EmbeddingSet x = testing::ref_set(testing::gaussian(30, 2, 1));
  const EmbeddingSet y = testing::gen_set(testing::gaussian(30, 2, 2));
  const DivergenceScore s = prdc_score(x, y, "recall", 5);
  EXPECT_EQ(s.orientation, Orientation::kHigherBetter);
  EXPECT_EQ(s.value, prdc(x, y, 5).recall);
  EXPECT_THROW(prdc_score(x, y, "fidelity", 5), DomainError);
}

}  // namespace
}  // namespace audiodiv
