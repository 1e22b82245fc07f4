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

// Unbiased squared MMD with a Gaussian RBF kernel.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "audiodiv/common.hpp"
#include "audiodiv/distance.hpp"
#include "audiodiv/parallel.hpp"
#include "audiodiv/score.hpp"
#include "audiodiv/tensor_io.hpp"

namespace audiodiv {

struct MmdConfig {
  /// Unset means the median heuristic on the pooled sample.
  std::optional<double> fixed_bandwidth;
  bool clamp_negative = false;

  void validate() const {
    if (fixed_bandwidth && !(*fixed_bandwidth > 0.0)) {
      throw DomainError("MMD bandwidth must be strictly positive");
    }
  }
};

struct Bandwidth {
  double sigma = 1.0;
  bool degenerate = false;
};

namespace detail {

inline constexpr std::size_t kRowBlock = 64;

/// Exact k-th smallest (0-based) squared distance among all distinct
/// unordered row pairs of z, for two adjacent ranks at once. Uses a counting
/// pass over value buckets, then a selection pass restricted to the buckets
/// that hold the requested ranks, so memory stays far below the pair count.
inline std::pair<double, double> pair_order_stats(const Matrix& z, std::uint64_t rank_lo,
                                                  std::uint64_t rank_hi) {
  const Eigen::Index m = z.rows();
  const std::size_t rows = static_cast<std::size_t>(m);
  const std::size_t block = std::max<std::size_t>(kRowBlock, (rows + 31) / 32);
  const std::size_t num_blocks = (rows + block - 1) / block;

  std::vector<double> block_min(num_blocks, std::numeric_limits<double>::infinity());
  std::vector<double> block_max(num_blocks, -std::numeric_limits<double>::infinity());
  parallel_blocks(rows, block, [&](std::size_t b0, std::size_t b1, std::size_t b) {
    for (std::size_t i = b0; i < b1; ++i) {
      for (Eigen::Index j = static_cast<Eigen::Index>(i) + 1; j < m; ++j) {
        const double v = squared_distance(z, static_cast<Eigen::Index>(i), z, j);
        block_min[b] = std::min(block_min[b], v);
        block_max[b] = std::max(block_max[b], v);
      }
    }
  });
  const double lo = *std::min_element(block_min.begin(), block_min.end());
  const double hi = *std::max_element(block_max.begin(), block_max.end());
  if (!(hi > lo)) return {lo, lo};

  constexpr std::size_t kBuckets = 1 << 16;
  const double width = (hi - lo) / static_cast<double>(kBuckets);
  auto bucket_of = [&](double v) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    return std::min(b, kBuckets - 1);
  };
  std::vector<std::vector<std::uint64_t>> counts(num_blocks);
  parallel_blocks(rows, block, [&](std::size_t b0, std::size_t b1, std::size_t b) {
    counts[b].assign(kBuckets, 0);
    for (std::size_t i = b0; i < b1; ++i) {
      for (Eigen::Index j = static_cast<Eigen::Index>(i) + 1; j < m; ++j) {
        ++counts[b][bucket_of(squared_distance(z, static_cast<Eigen::Index>(i), z, j))];
      }
    }
  });
  std::vector<std::uint64_t> hist(kBuckets, 0);
  for (const auto& c : counts) {
    for (std::size_t k = 0; k < kBuckets; ++k) hist[k] += c[k];
  }
  std::size_t first = kBuckets, last = kBuckets;
  std::uint64_t below_first = 0, cumulative = 0;
  for (std::size_t k = 0; k < kBuckets; ++k) {
    if (first == kBuckets && cumulative + hist[k] > rank_lo) {
      first = k;
      below_first = cumulative;
    }
    if (cumulative + hist[k] > rank_hi) {
      last = k;
      break;
    }
    cumulative += hist[k];
  }

  std::vector<std::vector<double>> picked(num_blocks);
  parallel_blocks(rows, block, [&](std::size_t b0, std::size_t b1, std::size_t b) {
    for (std::size_t i = b0; i < b1; ++i) {
      for (Eigen::Index j = static_cast<Eigen::Index>(i) + 1; j < m; ++j) {
        const double v = squared_distance(z, static_cast<Eigen::Index>(i), z, j);
        const std::size_t k = bucket_of(v);
        if (k >= first && k <= last) picked[b].push_back(v);
      }
    }
  });
  std::vector<double> values;
  for (auto& p : picked) values.insert(values.end(), p.begin(), p.end());
  std::sort(values.begin(), values.end());
  return {values[rank_lo - below_first], values[rank_hi - below_first]};
}

}  // namespace detail

/// Median of pairwise Euclidean distances over the pooled sample X u Y
/// (distinct unordered pairs). A zero median yields sigma = 1, flagged.
inline Bandwidth median_bandwidth(const Matrix& x, const Matrix& y) {
  require_same_dim(x, y, "median_bandwidth");
  const Eigen::Index m = x.rows() + y.rows();
  if (m < 2) throw InsufficientData("median_bandwidth needs at least 2 pooled points");
  Matrix z(m, x.cols());
  z << x, y;
  const std::uint64_t pairs = static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(m - 1) / 2;
  auto [v_lo, v_hi] = detail::pair_order_stats(z, (pairs - 1) / 2, pairs / 2);
  const double median = 0.5 * (std::sqrt(v_lo) + std::sqrt(v_hi));
  if (median == 0.0) return {1.0, true};
  return {median, false};
}

inline Bandwidth median_bandwidth(const EmbeddingSet& x, const EmbeddingSet& y) {
  return median_bandwidth(x.data(), y.data());
}

namespace detail {

/// Sum of k(a_i, b_j) over i < j when a and b are the same matrix
/// (`same` = true), else over all (i, j).
inline double kernel_sum(const Matrix& a, const Matrix& b, bool same, double gamma) {
  const Eigen::Index nb = b.rows();
  return parallel_sum<double>(static_cast<std::size_t>(a.rows()), kRowBlock,
                              [&](std::size_t b0, std::size_t b1) {
                                double s = 0.0;
                                for (std::size_t i = b0; i < b1; ++i) {
                                  const auto ii = static_cast<Eigen::Index>(i);
                                  double row = 0.0;
                                  for (Eigen::Index j = same ? ii + 1 : 0; j < nb; ++j) {
                                    row += std::exp(-gamma * squared_distance(a, ii, b, j));
                                  }
                                  s += row;
                                }
                                return s;
                              });
}

}  // namespace detail

inline DivergenceScore mmd2_unbiased(const Matrix& x, const Matrix& y, const MmdConfig& cfg = {}) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  require_same_dim(x, y, "mmd2_unbiased");
  const double m = static_cast<double>(x.rows());
  const double n = static_cast<double>(y.rows());
  if (x.rows() < 2 || y.rows() < 2) throw InsufficientData("mmd2_unbiased needs at least 2 points per set");

  DivergenceScore score;
  score.metric = "mmd";
  score.orientation = Orientation::kLowerBetter;
  score.n_ref = x.rows();
  score.n_gen = y.rows();

  Bandwidth bw;
  if (cfg.fixed_bandwidth) {
    bw.sigma = *cfg.fixed_bandwidth;
  } else {
    bw = median_bandwidth(x, y);
    if (bw.degenerate) score.flags.push_back("degenerate_bandwidth");
  }
  const double gamma = 1.0 / (2.0 * bw.sigma * bw.sigma);
  const double kxx = 2.0 * detail::kernel_sum(x, x, true, gamma) / (m * (m - 1.0));
  const double kyy = 2.0 * detail::kernel_sum(y, y, true, gamma) / (n * (n - 1.0));
  const double kxy = 2.0 * detail::kernel_sum(x, y, false, gamma) / (m * n);
  const double signed_value = kxx + kyy - kxy;

  score.value = cfg.clamp_negative ? std::max(0.0, signed_value) : signed_value;
  if (signed_value < 0.0) score.flags.push_back("negative_estimate");
  score.config = {{"kernel", "rbf"},
                  {"bandwidth_policy", cfg.fixed_bandwidth ? "fixed" : "median-heuristic"},
                  {"bandwidth", bw.sigma},
                  {"clamp_negative", cfg.clamp_negative}};
  score.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return score;
}

inline DivergenceScore mmd2_unbiased(const EmbeddingSet& x, const EmbeddingSet& y,
                                     const MmdConfig& cfg = {}) {
  return mmd2_unbiased(x.data(), y.data(), cfg);
}

}  // namespace audiodiv
