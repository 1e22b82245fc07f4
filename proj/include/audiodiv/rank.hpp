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

// Kendall tau-b, its exact permutation p-value, and exact binomial tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "audiodiv/common.hpp"

namespace audiodiv {

struct KendallTau {
  double tau = 0.0;
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t ties_x = 0;  ///< pairs tied in x only
  std::int64_t ties_y = 0;  ///< pairs tied in y only
  bool degenerate = false;  ///< a denominator factor was zero
};

inline KendallTau kendall_tau_b(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw DomainError("kendall_tau_b: length mismatch " + std::to_string(xs.size()) + " vs " +
                      std::to_string(ys.size()));
  }
  if (xs.size() < 2) throw DomainError("kendall_tau_b: need at least 2 observations");
  KendallTau r;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const double dx = xs[i] - xs[j];
      const double dy = ys[i] - ys[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        ++r.ties_x;
      } else if (dy == 0.0) {
        ++r.ties_y;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        ++r.concordant;
      } else {
        ++r.discordant;
      }
    }
  }
  const double cd = static_cast<double>(r.concordant + r.discordant);
  const double denom = (cd + static_cast<double>(r.ties_x)) * (cd + static_cast<double>(r.ties_y));
  if (denom == 0.0) {
    r.degenerate = true;
    return r;
  }
  r.tau = static_cast<double>(r.concordant - r.discordant) / std::sqrt(denom);
  return r;
}

inline double kendall_tau(std::span<const double> xs, std::span<const double> ys) {
  return kendall_tau_b(xs, ys).tau;
}

struct TauPValue {
  double p = 1.0;
  bool exact = true;  ///< false when the normal approximation was used
};

inline constexpr std::size_t kExactTauLimit = 10;

/// Two-sided p-value for tau-b: exact enumeration of all n! permutations of
/// ys for n <= 10, otherwise a normal approximation with continuity
/// correction (flagged via `exact = false`).
inline TauPValue tau_p_exact(std::span<const double> xs, std::span<const double> ys) {
  const KendallTau observed = kendall_tau_b(xs, ys);
  const std::size_t n = xs.size();
  const double threshold = std::abs(observed.tau) - 1e-12;
  if (n <= kExactTauLimit) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<double> permuted(n);
    std::uint64_t extreme = 0, total = 0;
    do {
      for (std::size_t i = 0; i < n; ++i) permuted[i] = ys[perm[i]];
      if (std::abs(kendall_tau_b(xs, permuted).tau) >= threshold) ++extreme;
      ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {static_cast<double>(extreme) / static_cast<double>(total), true};
  }
  // Normal approximation on S = C - D with the tie-corrected variance.
  auto tie_groups = [](std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    std::vector<double> sizes;
    for (std::size_t i = 0; i < s.size();) {
      std::size_t j = i;
      while (j < s.size() && s[j] == s[i]) ++j;
      if (j - i > 1) sizes.push_back(static_cast<double>(j - i));
      i = j;
    }
    return sizes;
  };
  const double nn = static_cast<double>(n);
  double v0 = nn * (nn - 1.0) * (2.0 * nn + 5.0);
  double vt = 0.0, vu = 0.0, t1 = 0.0, u1 = 0.0, t2 = 0.0, u2 = 0.0;
  for (double t : tie_groups(xs)) {
    vt += t * (t - 1.0) * (2.0 * t + 5.0);
    t1 += t * (t - 1.0);
    t2 += t * (t - 1.0) * (t - 2.0);
  }
  for (double u : tie_groups(ys)) {
    vu += u * (u - 1.0) * (2.0 * u + 5.0);
    u1 += u * (u - 1.0);
    u2 += u * (u - 1.0) * (u - 2.0);
  }
  const double var = (v0 - vt - vu) / 18.0 + t1 * u1 / (2.0 * nn * (nn - 1.0)) +
                     t2 * u2 / (9.0 * nn * (nn - 1.0) * (nn - 2.0));
  const double s = static_cast<double>(observed.concordant - observed.discordant);
  if (!(var > 0.0)) return {1.0, false};
  const double z = std::max(0.0, std::abs(s) - 1.0) / std::sqrt(var);
  return {std::min(1.0, std::erfc(z / std::sqrt(2.0))), false};
}

/// Exact two-sided binomial test of H0: P(success) = 0.5.
inline double binomial_test_two_sided(std::int64_t successes, std::int64_t trials) {
  if (trials <= 0) throw DegenerateData("binomial test needs at least one trial");
  if (successes < 0 || successes > trials) throw DomainError("binomial test: successes out of range");
  const std::int64_t tail = std::min(successes, trials - successes);
  // Sum P(X <= tail) in log space to stay accurate for large n.
  const double n = static_cast<double>(trials);
  const double log_half_n = n * std::log(0.5);
  double acc = 0.0;
  for (std::int64_t i = 0; i <= tail; ++i) {
    const double k = static_cast<double>(i);
    acc += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + log_half_n);
  }
  return std::min(1.0, 2.0 * acc);
}

}  // namespace audiodiv
