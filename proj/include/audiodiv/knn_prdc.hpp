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

// Precision, recall, density and coverage from k-NN support balls.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "audiodiv/common.hpp"
#include "audiodiv/distance.hpp"
#include "audiodiv/parallel.hpp"
#include "audiodiv/score.hpp"
#include "audiodiv/tensor_io.hpp"

namespace audiodiv {

inline constexpr int kDefaultPrdcK = 5;

struct PrdcResult {
  double precision = 0.0;
  double recall = 0.0;
  double density = 0.0;
  double coverage = 0.0;
  int k = kDefaultPrdcK;
};

/// Distance from each point to its k-th nearest neighbour in the same set,
/// itself excluded.
inline std::vector<double> knn_radii(const Matrix& s, int k) {
  const Eigen::Index n = s.rows();
  if (k < 1 || k >= n) {
    throw DomainError("knn_radii: k must satisfy 1 <= k <= N-1 (k=" + std::to_string(k) +
                      ", N=" + std::to_string(n) + ")");
  }
  std::vector<double> radii(static_cast<std::size_t>(n));
  parallel_blocks(static_cast<std::size_t>(n), 32, [&](std::size_t b0, std::size_t b1, std::size_t) {
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n));
    for (std::size_t i = b0; i < b1; ++i) {
      d.clear();
      const auto ii = static_cast<Eigen::Index>(i);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != ii) d.push_back(distance(s, ii, s, j));
      }
      auto kth = d.begin() + (k - 1);
      std::nth_element(d.begin(), kth, d.end());
      radii[i] = *kth;
    }
  });
  return radii;
}

inline std::vector<double> knn_radii(const EmbeddingSet& s, int k) { return knn_radii(s.data(), k); }

inline PrdcResult prdc(const Matrix& ref, const Matrix& gen, int k = kDefaultPrdcK) {
  require_same_dim(ref, gen, "prdc");
  const Eigen::Index n_ref = ref.rows();
  const Eigen::Index n_gen = gen.rows();
  if (k < 1 || k > std::min(n_ref, n_gen) - 1) {
    throw DomainError("prdc: k must satisfy 1 <= k <= min(N_ref, N_gen) - 1 (k=" +
                      std::to_string(k) + ")");
  }
  const std::vector<double> ref_radii = knn_radii(ref, k);
  const std::vector<double> gen_radii = knn_radii(gen, k);

  // Per generated point: number of reference balls containing it.
  std::vector<std::int64_t> ref_balls_hit(static_cast<std::size_t>(n_gen), 0);
  // Per reference point: inside some generated ball (recall), and its own
  // ball contains some generated point (coverage).
  std::vector<char> recalled(static_cast<std::size_t>(n_ref), 0);
  std::vector<char> covered(static_cast<std::size_t>(n_ref), 0);

  parallel_blocks(static_cast<std::size_t>(n_gen), 32, [&](std::size_t b0, std::size_t b1, std::size_t) {
    for (std::size_t j = b0; j < b1; ++j) {
      std::int64_t hits = 0;
      for (Eigen::Index i = 0; i < n_ref; ++i) {
        if (distance(gen, static_cast<Eigen::Index>(j), ref, i) <= ref_radii[static_cast<std::size_t>(i)]) ++hits;
      }
      ref_balls_hit[j] = hits;
    }
  });
  parallel_blocks(static_cast<std::size_t>(n_ref), 32, [&](std::size_t b0, std::size_t b1, std::size_t) {
    for (std::size_t i = b0; i < b1; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      for (Eigen::Index j = 0; j < n_gen; ++j) {
        const double d = distance(gen, j, ref, ii);
        if (!recalled[i] && d <= gen_radii[static_cast<std::size_t>(j)]) recalled[i] = 1;
        if (!covered[i] && d <= ref_radii[i]) covered[i] = 1;
        if (recalled[i] && covered[i]) break;
      }
    }
  });

  PrdcResult r;
  r.k = k;
  std::int64_t precise = 0, hit_total = 0;
  for (std::int64_t h : ref_balls_hit) {
    precise += h > 0;
    hit_total += h;
  }
  r.precision = static_cast<double>(precise) / static_cast<double>(n_gen);
  r.density = static_cast<double>(hit_total) / (static_cast<double>(k) * static_cast<double>(n_gen));
  r.recall = static_cast<double>(std::count(recalled.begin(), recalled.end(), 1)) /
             static_cast<double>(n_ref);
  r.coverage = static_cast<double>(std::count(covered.begin(), covered.end(), 1)) /
               static_cast<double>(n_ref);
  return r;
}

inline PrdcResult prdc(const EmbeddingSet& ref, const EmbeddingSet& gen, int k = kDefaultPrdcK) {
  return prdc(ref.data(), gen.data(), k);
}

/// One component of a PRDC result as a higher-better score.
inline DivergenceScore prdc_score(const EmbeddingSet& ref, const EmbeddingSet& gen,
                                  const std::string& component, int k = kDefaultPrdcK) {
  const auto start = std::chrono::steady_clock::now();
  const PrdcResult r = prdc(ref, gen, k);
  DivergenceScore s;
  s.metric = component;
  s.orientation = Orientation::kHigherBetter;
  if (component == "precision") {
    s.value = r.precision;
  } else if (component == "recall") {
    s.value = r.recall;
  } else if (component == "density") {
    s.value = r.density;
  } else if (component == "coverage") {
    s.value = r.coverage;
  } else {
    throw DomainError("unknown PRDC component '" + component + "'");
  }
  s.n_ref = ref.size();
  s.n_gen = gen.size();
  s.config = {{"k", k},
              {"precision", r.precision},
              {"recall", r.recall},
              {"density", r.density},
              {"coverage", r.coverage}};
  s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

}  // namespace audiodiv
