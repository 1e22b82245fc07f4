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

#pragma once

#include <cmath>

#include "audiodiv/common.hpp"

namespace audiodiv {

/// Squared Euclidean distance between row i of a and row j of b, summed in
/// dimension order.
inline double squared_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  const double* x = a.data() + i * a.cols();
  const double* y = b.data() + j * b.cols();
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return s;
}

inline double distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  return std::sqrt(squared_distance(a, i, b, j));
}

inline void require_same_dim(const Matrix& a, const Matrix& b, const char* what) {
  if (a.cols() != b.cols()) {
    throw DomainError(std::string(what) + ": dimension mismatch " + std::to_string(a.cols()) +
                      " vs " + std::to_string(b.cols()));
  }
}

}  // namespace audiodiv
