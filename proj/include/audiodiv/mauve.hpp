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

// MAUVE from k-means histograms and divergence frontiers, and MAD, its
// negative log (lower is better, 0 for identical histograms).

#pragma once

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "audiodiv/common.hpp"
#include "audiodiv/distance.hpp"
#include "audiodiv/kmeans.hpp"
#include "audiodiv/score.hpp"
#include "audiodiv/tensor_io.hpp"

namespace audiodiv {

struct MauveConfig {
  std::optional<int> num_clusters;  ///< Unset: max(2, N/10) capped at 500.
  double scale_c = 5.0;
  int grid_size = 25;
  std::uint64_t seed = 0;
  int kmeans_restarts = 3;
  int max_iters = 300;
  std::optional<int> pca_dims;  ///< Unset: no projection.

  void validate() const {
    if (num_clusters && *num_clusters < 2) throw DomainError("num_clusters must be >= 2");
    if (!(scale_c > 0.0)) throw DomainError("scale_c must be > 0");
    if (grid_size < 3) throw DomainError("grid_size must be >= 3");
    if (kmeans_restarts < 1) throw DomainError("kmeans_restarts must be >= 1");
    if (max_iters < 1) throw DomainError("max_iters must be >= 1");
    if (pca_dims && *pca_dims < 1) throw DomainError("pca_dims must be >= 1");
  }

  nlohmann::json to_json() const {
    return {{"num_clusters", num_clusters ? nlohmann::json(*num_clusters) : nlohmann::json("auto")},
            {"scale_c", scale_c},
            {"grid_size", grid_size},
            {"seed", seed},
            {"kmeans_restarts", kmeans_restarts},
            {"max_iters", max_iters},
            {"pca_dims", pca_dims ? nlohmann::json(*pca_dims) : nlohmann::json("off")}};
  }
};

/// Cluster count used when none is given.
inline int auto_num_clusters(Eigen::Index pooled_size) {
  return static_cast<int>(std::min<Eigen::Index>(500, std::max<Eigen::Index>(2, pooled_size / 10)));
}

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

struct DivergenceCurve {
  std::vector<CurvePoint> points;  ///< Sorted by x ascending.
  std::vector<double> lambdas;     ///< Mixture weight behind each point.
};

/// Reference histogram from assignments[0, split), candidate histogram from
/// assignments[split, end).
inline std::pair<Vector, Vector> histograms(const std::vector<int>& assignments, std::size_t split, int k) {
  if (split == 0 || split >= assignments.size()) {
    throw DomainError("histograms: split must leave both blocks non-empty");
  }
  Vector p = Vector::Zero(k);
  Vector q = Vector::Zero(k);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const int b = assignments[i];
    if (b < 0 || b >= k) throw DomainError("histograms: bin id out of range");
    (i < split ? p : q)[b] += 1.0;
  }
  p /= static_cast<double>(split);
  q /= static_cast<double>(assignments.size() - split);
  return {p, q};
}

/// KL(a || r) with 0 ln(0/x) = 0, floored at 0 against rounding.
inline double kl_divergence(const Vector& a, const Vector& r) {
  double kl = 0.0;
  for (Eigen::Index b = 0; b < a.size(); ++b) {
    if (a[b] > 0.0) {
      assert(r[b] > 0.0 && "mixture support must cover both histograms");
      kl += a[b] * std::log(a[b] / r[b]);
    }
  }
  return std::max(kl, 0.0);
}

inline DivergenceCurve divergence_curve(const Vector& p, const Vector& q, double c, int grid_size) {
  if (p.size() != q.size()) throw DomainError("divergence_curve: histograms differ in bin count");
  if (grid_size < 1) throw DomainError("divergence_curve: grid_size must be >= 1");
  struct Row {
    double lambda, x, y;
  };
  std::vector<Row> rows;
  rows.reserve(static_cast<std::size_t>(grid_size) + 2);
  for (int j = 1; j <= grid_size; ++j) {
    const double lambda = static_cast<double>(j) / static_cast<double>(grid_size + 1);
    const Vector mix = lambda * p + (1.0 - lambda) * q;
    rows.push_back({lambda, std::exp(-c * kl_divergence(q, mix)), std::exp(-c * kl_divergence(p, mix))});
  }
  rows.push_back({1.0, 0.0, 1.0});
  rows.push_back({0.0, 1.0, 0.0});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.y > b.y;
  });
  DivergenceCurve curve;
  for (const Row& r : rows) {
    curve.points.push_back({r.x, r.y});
    curve.lambdas.push_back(r.lambda);
  }
  return curve;
}

/// Trapezoid-rule area under the x-sorted curve.
inline double mauve_score(const DivergenceCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const CurvePoint& a = curve.points[i - 1];
    const CurvePoint& b = curve.points[i];
    area += (b.x - a.x) * (a.y + b.y) * 0.5;
  }
  return area;
}

struct MauveResult {
  DivergenceScore score;  ///< metric "mad"
  double mauve = 1.0;
  DivergenceCurve curve;
  Vector p_hist;
  Vector q_hist;
  int num_clusters = 0;
};

namespace detail {

inline Matrix pca_project(const Matrix& z, int dims) {
  if (dims > z.cols()) {
    throw DomainError("pca_dims " + std::to_string(dims) + " exceeds embedding dimension " +
                      std::to_string(z.cols()));
  }
  const Vector mean = z.colwise().mean().transpose();
  Matrix centered = z.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(std::max<Eigen::Index>(1, z.rows() - 1));
  cov = (cov + cov.transpose()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("PCA eigensolver did not converge");
  // Eigenvalues ascend; keep the trailing (largest) components.
  const Eigen::MatrixXd basis = es.eigenvectors().rightCols(dims);
  return centered * basis;
}

}  // namespace detail

/// MAUVE between reference and candidate sets plus the intermediate
/// histograms and frontier.
inline MauveResult mauve(const Matrix& ref, const Matrix& gen, const MauveConfig& cfg = {}) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  require_same_dim(ref, gen, "mad");
  Matrix pooled(ref.rows() + gen.rows(), ref.cols());
  pooled << ref, gen;
  const Eigen::Index distinct = count_distinct_rows(pooled);
  if (distinct < 2) throw DataError("mad: pooled data is degenerate (all points identical)");

  MauveResult out;
  DivergenceScore& score = out.score;
  score.metric = "mad";
  score.orientation = Orientation::kLowerBetter;
  score.n_ref = ref.rows();
  score.n_gen = gen.rows();

  if (cfg.pca_dims) pooled = detail::pca_project(pooled, *cfg.pca_dims);

  int k = 0;
  if (cfg.num_clusters) {
    k = *cfg.num_clusters;
  } else {
    k = auto_num_clusters(pooled.rows());
    if (k > distinct) {
      k = static_cast<int>(distinct);
      score.flags.push_back("clusters_capped_by_distinct_points");
    }
  }
  KMeansOptions opt;
  opt.seed = cfg.seed;
  opt.restarts = cfg.kmeans_restarts;
  opt.max_iters = cfg.max_iters;
  const KMeansResult km = kmeans(pooled, k, opt);

  std::tie(out.p_hist, out.q_hist) = histograms(km.assignments, static_cast<std::size_t>(ref.rows()), k);
  out.curve = divergence_curve(out.p_hist, out.q_hist, cfg.scale_c, cfg.grid_size);
  out.mauve = mauve_score(out.curve);
  out.num_clusters = k;
  score.value = -std::log(out.mauve);
  if (score.value < 0.0) score.value = 0.0;  // area can exceed 1 by rounding only
  score.config = cfg.to_json();
  score.config["clusters_used"] = k;
  score.config["mauve"] = out.mauve;
  score.config["kmeans_wcss"] = km.wcss;
  score.config["kmeans_iterations"] = km.iterations;
  score.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline MauveResult mauve(const EmbeddingSet& ref, const EmbeddingSet& gen, const MauveConfig& cfg = {}) {
  return mauve(ref.data(), gen.data(), cfg);
}

/// -ln(MAUVE).
inline DivergenceScore mad(const EmbeddingSet& ref, const EmbeddingSet& gen, const MauveConfig& cfg = {}) {
  return mauve(ref, gen, cfg).score;
}

}  // namespace audiodiv
