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

// Gaussian summaries of embedding sets and the Frechet distance between
// them (FAD).

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "audiodiv/common.hpp"
#include "audiodiv/score.hpp"
#include "audiodiv/tensor_io.hpp"

namespace audiodiv {

struct GaussianStats {
  Vector mean;
  Eigen::MatrixXd cov;
  Eigen::Index n = 0;

  Eigen::Index dim() const { return mean.size(); }
};

/// Column means and unbiased (N-1) covariance, symmetrized exactly.
inline GaussianStats fit_gaussian(const Matrix& data) {
  const Eigen::Index n = data.rows();
  if (n < 2) throw InsufficientData("fit_gaussian needs at least 2 samples, got " + std::to_string(n));
  GaussianStats g;
  g.n = n;
  g.mean = data.colwise().mean().transpose();
  Matrix centered = data.rowwise() - g.mean.transpose();
  Eigen::MatrixXd c = (centered.transpose() * centered) / static_cast<double>(n - 1);
  g.cov = (c + c.transpose()) * 0.5;
  return g;
}

inline GaussianStats fit_gaussian(const EmbeddingSet& set) { return fit_gaussian(set.data()); }

/// Symmetric PSD square root via eigendecomposition; negative eigenvalues
/// (rounding residue) are clamped to zero.
inline Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw DomainError("matrix_sqrt_psd: matrix is not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * scale) {
    throw DomainError("matrix_sqrt_psd: asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("matrix_sqrt_psd: eigensolver did not converge");
  Vector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& v = es.eigenvectors();
  Eigen::MatrixXd s = v * roots.asDiagonal() * v.transpose();
  return (s + s.transpose()) * 0.5;
}

/// Frechet distance between two Gaussians:
///   |mu1 - mu2|^2 + tr(S1) + tr(S2) - 2 tr(sqrt(sqrt(S1) S2 sqrt(S1))).
/// The congruent symmetric form keeps the spectrum real. A negative total is
/// clamped to 0 and flagged when its magnitude exceeds 1e-6.
inline DivergenceScore frechet_distance(const GaussianStats& g1, const GaussianStats& g2) {
  const auto start = std::chrono::steady_clock::now();
  if (g1.dim() != g2.dim()) {
    throw DomainError("frechet_distance: dimension mismatch " + std::to_string(g1.dim()) + " vs " +
                      std::to_string(g2.dim()));
  }
  const Eigen::MatrixXd s1_half = matrix_sqrt_psd(g1.cov);
  Eigen::MatrixXd inner = s1_half * g2.cov * s1_half;
  inner = (inner + inner.transpose()) * 0.5;
  const double cross = matrix_sqrt_psd(inner).trace();
  const double mean_term = (g1.mean - g2.mean).squaredNorm();
  const double raw = mean_term + g1.cov.trace() + g2.cov.trace() - 2.0 * cross;

  DivergenceScore score;
  score.metric = "fad";
  score.orientation = Orientation::kLowerBetter;
  score.value = std::max(0.0, raw);
  score.n_ref = g1.n;
  score.n_gen = g2.n;
  score.config = {{"covariance", "unbiased"}, {"raw_value", raw}};
  if (raw < -1e-6) score.flags.push_back("negative_residue_clamped");
  score.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return score;
}

inline DivergenceScore fad(const EmbeddingSet& ref, const EmbeddingSet& gen) {
  const auto start = std::chrono::steady_clock::now();
  DivergenceScore s = frechet_distance(fit_gaussian(ref), fit_gaussian(gen));
  s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

}  // namespace audiodiv
