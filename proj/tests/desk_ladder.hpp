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

// The desk-scale fidelity ladder: an 11-level Gaussian-noise ladder over a
// seeded d=16, N=2000 embedding cloud, scored against an independent
// reference sample from the clean distribution.

#pragma once

#include <cstdint>

#include "audiodiv/degrade.hpp"
#include "audiodiv/metaeval.hpp"
#include "test_util.hpp"

namespace audiodiv::testing {

inline constexpr Eigen::Index kDeskN = 2000;
inline constexpr Eigen::Index kDeskDim = 16;
inline constexpr double kDeskCloudStd = 0.08;
inline constexpr std::uint64_t kDeskSeed = 1;

inline DistortionLadder desk_ladder(std::uint64_t seed = kDeskSeed) {
  const Matrix base = gaussian(kDeskN, kDeskDim, seed * 3 + 1, kDeskCloudStd);
  DistortionLadder ladder;
  ladder.desideratum = "fidelity";
  ladder.reference = EmbeddingSet(gaussian(kDeskN, kDeskDim, seed * 3 + 2, kDeskCloudStd), Role::kReference, "reference");
  const auto sigmas = default_noise_sigmas();
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    const Matrix eps = gaussian(kDeskN, kDeskDim, derive_seed(seed, {7, k}));
    ladder.levels.emplace_back(base + eps * sigmas[k], Role::kCandidate, "level " + std::to_string(k + 1));
  }
  return ladder;
}

}  // namespace audiodiv::testing
