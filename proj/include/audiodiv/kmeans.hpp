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

// Seeded k-means (k-means++ initialisation, Lloyd iterations, restarts).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "audiodiv/common.hpp"
#include "audiodiv/distance.hpp"
#include "audiodiv/parallel.hpp"
#include "audiodiv/rng.hpp"

namespace audiodiv {

struct KMeansOptions {
  std::uint64_t seed = 0;
  int restarts = 3;
  int max_iters = 300;
  double tolerance = 1e-6;  ///< Largest centroid shift that counts as converged.
};

struct KMeansResult {
  std::vector<int> assignments;
  Matrix centroids;
  double wcss = 0.0;
  int iterations = 0;
  int best_restart = 0;
};

/// Number of distinct rows (exact comparison).
inline Eigen::Index count_distinct_rows(const Matrix& x) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::Index d = x.cols();
  auto row_less = [&](Eigen::Index a, Eigen::Index b) {
    const double* ra = x.data() + a * d;
    const double* rb = x.data() + b * d;
    return std::lexicographical_compare(ra, ra + d, rb, rb + d);
  };
  std::sort(order.begin(), order.end(), row_less);
  Eigen::Index distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (row_less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

namespace detail {

inline constexpr std::size_t kAssignBlock = 256;

/// Nearest-centroid assignment; fills per-point squared distance. Ties go
/// to the lowest centroid index. Each point is handled by its own
/// matrix-vector product, so equal points always receive equal labels no
/// matter where they sit in the input.
inline void assign_points(const Matrix& x, const Vector& x_norms, const Matrix& centroids,
                          std::vector<int>& labels, std::vector<double>& dist2) {
  const Eigen::Index k = centroids.rows();
  const Vector c_norms = centroids.rowwise().squaredNorm();
  parallel_blocks(static_cast<std::size_t>(x.rows()), kAssignBlock,
                  [&](std::size_t b0, std::size_t b1, std::size_t) {
                    Vector cross(k);
                    for (std::size_t i = b0; i < b1; ++i) {
                      const auto row = static_cast<Eigen::Index>(i);
                      cross.noalias() = centroids * x.row(row).transpose();
                      int best = 0;
                      double best_d = std::numeric_limits<double>::infinity();
                      for (Eigen::Index c = 0; c < k; ++c) {
                        const double dd = x_norms[row] - 2.0 * cross[c] + c_norms[c];
                        if (dd < best_d) {
                          best_d = dd;
                          best = static_cast<int>(c);
                        }
                      }
                      labels[i] = best;
                      dist2[i] = std::max(0.0, best_d);
                    }
                  });
}

inline Matrix kmeanspp_seed(const Matrix& x, Eigen::Index k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Matrix centers(k, x.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = x.row(pick(rng));
  std::vector<double> d2(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    d2[i] = squared_distance(x, static_cast<Eigen::Index>(i), centers, 0);
  }, 1024);
  for (Eigen::Index c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    Eigen::Index chosen = n - 1;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc > target && d2[static_cast<std::size_t>(i)] > 0.0) {
          chosen = i;
          break;
        }
      }
      // Rounding can walk past the end; take the last point with mass.
      while (d2[static_cast<std::size_t>(chosen)] <= 0.0 && chosen > 0) --chosen;
    }
    centers.row(c) = x.row(chosen);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
      d2[i] = std::min(d2[i], squared_distance(x, static_cast<Eigen::Index>(i), centers, c));
    }, 1024);
  }
  return centers;
}

inline KMeansResult lloyd(const Matrix& x, const Vector& x_norms, Matrix centroids,
                          const KMeansOptions& opt) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = centroids.rows();
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<double> dist2(static_cast<std::size_t>(n));
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    assign_points(x, x_norms, centroids, labels, dist2);
    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      sums.row(l) += x.row(i);
      ++counts[static_cast<std::size_t>(l)];
    }
    Matrix updated(k, x.cols());
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        updated.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!taken[static_cast<std::size_t>(i)] && dist2[static_cast<std::size_t>(i)] > far_d) {
          far_d = dist2[static_cast<std::size_t>(i)];
          far = i;
        }
      }
      taken[static_cast<std::size_t>(far)] = 1;
      updated.row(c) = x.row(far);
    }
    const double shift = (updated - centroids).rowwise().norm().maxCoeff();
    centroids = std::move(updated);
    if (shift < opt.tolerance) {
      ++it;
      break;
    }
  }
  assign_points(x, x_norms, centroids, labels, dist2);
  KMeansResult r;
  r.assignments = std::move(labels);
  r.centroids = std::move(centroids);
  // Exact within-cluster sum of squares from the final assignment.
  r.wcss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    r.wcss += squared_distance(x, i, r.centroids, r.assignments[static_cast<std::size_t>(i)]);
  }
  r.iterations = it;
  return r;
}

}  // namespace detail

/// k-means on the rows of `x`. Deterministic for a given (data, k, options).
inline KMeansResult kmeans(const Matrix& x, Eigen::Index k, const KMeansOptions& opt = {}) {
  if (k < 2) throw DomainError("kmeans: k must be >= 2");
  if (opt.restarts < 1 || opt.max_iters < 1) {
    throw DomainError("kmeans: restarts and max_iters must be >= 1");
  }
  const Eigen::Index distinct = count_distinct_rows(x);
  if (k > distinct) {
    throw DomainError("kmeans: k=" + std::to_string(k) + " exceeds the " + std::to_string(distinct) +
                      " distinct points");
  }
  const Vector x_norms = x.rowwise().squaredNorm();
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng = keyed_rng(opt.seed, {static_cast<std::uint64_t>(r)});
    KMeansResult trial = detail::lloyd(x, x_norms, detail::kmeanspp_seed(x, k, rng), opt);
    trial.best_restart = r;
    if (trial.wcss < best.wcss) best = std::move(trial);
  }
  return best;
}

}  // namespace audiodiv
