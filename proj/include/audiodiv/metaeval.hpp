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

// Meta-evaluation of metrics on distortion ladders: every level is scored
// against a reference set and the scores are rank-correlated with the
// ground-truth level order.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "audiodiv/common.hpp"
#include "audiodiv/kernel_mmd.hpp"
#include "audiodiv/knn_prdc.hpp"
#include "audiodiv/mauve.hpp"
#include "audiodiv/moments.hpp"
#include "audiodiv/rank.hpp"
#include "audiodiv/rng.hpp"
#include "audiodiv/score.hpp"
#include "audiodiv/tensor_io.hpp"

namespace audiodiv {

/// Metric id plus the configuration of whichever family it belongs to.
struct MetricSpec {
  std::string id = "fad";
  MmdConfig mmd;
  int prdc_k = kDefaultPrdcK;
  MauveConfig mauve;

  MetricSpec() = default;
  MetricSpec(std::string metric_id) : id(std::move(metric_id)) {}

  Orientation orientation() const { return metric_orientation(id); }

  nlohmann::json to_json() const {
    nlohmann::json j = {{"metric", id}, {"orientation", to_string(orientation())}};
    if (id == "mmd") {
      j["bandwidth"] = mmd.fixed_bandwidth ? nlohmann::json(*mmd.fixed_bandwidth)
                                           : nlohmann::json("median-heuristic");
      j["clamp_negative"] = mmd.clamp_negative;
    } else if (id == "mad" || id == "mauve") {
      j["mauve"] = mauve.to_json();
    } else if (id != "fad") {
      j["k"] = prdc_k;
    }
    return j;
  }
};

inline DivergenceScore compute_metric(const EmbeddingSet& ref, const EmbeddingSet& gen,
                                      const MetricSpec& spec) {
  const Orientation orientation = spec.orientation();  // rejects unknown ids
  DivergenceScore s;
  if (spec.id == "fad") {
    s = fad(ref, gen);
  } else if (spec.id == "mmd") {
    s = mmd2_unbiased(ref, gen, spec.mmd);
  } else if (spec.id == "mad") {
    s = mad(ref, gen, spec.mauve);
  } else if (spec.id == "mauve") {
    MauveResult r = mauve(ref, gen, spec.mauve);
    s = std::move(r.score);
    s.metric = "mauve";
    s.value = r.mauve;
  } else {
    s = prdc_score(ref, gen, spec.id, spec.prdc_k);
  }
  s.orientation = orientation;
  return s;
}

struct DistortionLadder {
  std::vector<EmbeddingSet> levels;  ///< levels[i] is level i + 1
  std::optional<EmbeddingSet> reference;
  std::string desideratum = "other";

  void validate() const {
    if (levels.size() < 2) throw DomainError("distortion ladder needs K >= 2 levels");
    if (!reference) throw DomainError("distortion ladder has no reference set");
  }

  /// The same ladder scored against its own least-distorted level.
  DistortionLadder with_oracle_reference() const {
    DistortionLadder out = *this;
    out.reference = levels.front().with_role(Role::kReference, "oracle:" + levels.front().label());
    return out;
  }
};

struct MetricRun {
  std::string metric;
  Orientation orientation = Orientation::kLowerBetter;
  std::vector<double> scores;
  double tau = 0.0;
  std::optional<double> p_value;
  bool p_exact = true;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> flags;
  std::int64_t subsample_size = 0;  ///< 0 when the full level sets were used
};

/// Orientation-corrected tau of scores against levels 1..K: +1 means the
/// metric orders the ladder perfectly whichever way it points.
inline std::pair<double, KendallTau> oriented_tau(const std::vector<double>& scores, Orientation o) {
  std::vector<double> truth(scores.size());
  std::iota(truth.begin(), truth.end(), 1.0);
  KendallTau kt = kendall_tau_b(scores, truth);
  const double sign = o == Orientation::kLowerBetter ? 1.0 : -1.0;
  return {sign * kt.tau + 0.0, kt};
}

inline MetricRun evaluate_ladder(const DistortionLadder& ladder, const MetricSpec& spec) {
  ladder.validate();
  MetricRun run;
  run.metric = spec.id;
  run.orientation = spec.orientation();
  run.config = spec.to_json();
  run.config["desideratum"] = ladder.desideratum;
  run.config["reference"] = ladder.reference->label();
  run.scores.reserve(ladder.levels.size());
  for (std::size_t i = 0; i < ladder.levels.size(); ++i) {
    try {
      DivergenceScore s = compute_metric(*ladder.reference, ladder.levels[i], spec);
      for (const auto& f : s.flags) run.flags.push_back("level " + std::to_string(i + 1) + ": " + f);
      run.scores.push_back(s.value);
    } catch (const DataFault& e) {
      throw DataError("level " + std::to_string(i + 1) + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("level " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  auto [tau, kt] = oriented_tau(run.scores, run.orientation);
  run.tau = tau;
  if (kt.degenerate) run.flags.push_back("tau_degenerate");
  std::vector<double> truth(run.scores.size());
  std::iota(truth.begin(), truth.end(), 1.0);
  TauPValue p = tau_p_exact(run.scores, truth);
  run.p_value = p.p;
  run.p_exact = p.exact;
  if (!p.exact) run.flags.push_back("p_value_normal_approximation");
  return run;
}

/// Seeded uniform subsample of `size` rows without replacement, rows kept
/// in their original order.
inline std::vector<Eigen::Index> subsample_indices(Eigen::Index n, Eigen::Index size, std::uint64_t seed,
                                                   std::uint64_t stream) {
  if (size < 2 || size > n) {
    throw DomainError("subsample size " + std::to_string(size) + " out of range for a set of " +
                      std::to_string(n));
  }
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Rng rng = keyed_rng(seed, {stream});
  for (Eigen::Index i = 0; i < size; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(size));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline std::vector<MetricRun> subsample_run(const DistortionLadder& ladder, const MetricSpec& spec,
                                            const std::vector<Eigen::Index>& sizes, std::uint64_t seed) {
  ladder.validate();
  Eigen::Index smallest = ladder.levels.front().size();
  for (const auto& l : ladder.levels) smallest = std::min(smallest, l.size());
  for (Eigen::Index s : sizes) {
    if (s < 2 || s > smallest) {
      throw DomainError("subsample size " + std::to_string(s) + " exceeds smallest level set (" +
                        std::to_string(smallest) + ")");
    }
  }
  std::vector<MetricRun> runs;
  for (Eigen::Index size : sizes) {
    DistortionLadder sub;
    sub.reference = ladder.reference;
    sub.desideratum = ladder.desideratum;
    for (std::size_t i = 0; i < ladder.levels.size(); ++i) {
      const EmbeddingSet& level = ladder.levels[i];
      const auto idx = subsample_indices(level.size(), size, seed, i + 1);
      Matrix rows(size, level.dim());
      for (Eigen::Index r = 0; r < size; ++r) rows.row(r) = level.data().row(idx[static_cast<std::size_t>(r)]);
      sub.levels.emplace_back(std::move(rows), level.role(), level.label());
    }
    MetricRun run = evaluate_ladder(sub, spec);
    run.subsample_size = size;
    run.config["subsample_size"] = size;
    run.config["subsample_seed"] = seed;
    runs.push_back(std::move(run));
  }
  return runs;
}

struct NormalizedScores {
  std::vector<double> values;
  bool degenerate = false;
};

/// Min-max normalisation to [0, 1]; constant input maps to 0.5, flagged.
inline NormalizedScores normalize_scores(const std::vector<double>& scores) {
  NormalizedScores out;
  if (scores.empty()) return out;
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (!(*hi > *lo)) {
    out.values.assign(scores.size(), 0.5);
    out.degenerate = true;
    return out;
  }
  const double range = *hi - *lo;
  out.values.reserve(scores.size());
  for (double s : scores) out.values.push_back((s - *lo) / range);
  return out;
}

inline std::vector<NormalizedScores> normalize_scores(const std::vector<MetricRun>& runs) {
  std::vector<NormalizedScores> out;
  out.reserve(runs.size());
  for (const auto& r : runs) out.push_back(normalize_scores(r.scores));
  return out;
}

// ---------------------------------------------------------------------------
// Ladder description files
//
// {
//   "desideratum": "fidelity",
//   "pool": "mean",                       (optional, default "mean")
//   "reference": "ref.json" | "ref.npy",
//   "levels": [{"index": 1, "path": "level01.json"}, ...]
// }
// Paths resolve against the ladder file's directory. ".json" paths are
// manifests, anything else a pre-pooled N x d NPY matrix.

inline DistortionLadder load_ladder(const std::filesystem::path& path,
                                    std::optional<PoolMethod> pool_override = std::nullopt) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  DistortionLadder ladder;
  try {
    const PoolMethod method =
        pool_override ? *pool_override : parse_pool_method(j.value("pool", std::string("mean")));
    ladder.desideratum = j.value("desideratum", std::string("other"));
    ladder.reference = load_embedding_set(resolve(j.at("reference").get<std::string>()), method,
                                          Role::kReference, "reference");
    std::vector<std::pair<int, std::string>> levels;
    for (const auto& l : j.at("levels")) levels.emplace_back(l.at("index").get<int>(), l.at("path").get<std::string>());
    std::sort(levels.begin(), levels.end());
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (levels[i].first != static_cast<int>(i) + 1) {
        throw FormatError(path.string() + ": level indices must be contiguous from 1");
      }
      ladder.levels.push_back(load_embedding_set(resolve(levels[i].second), method, Role::kCandidate,
                                                 "level " + std::to_string(levels[i].first)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed ladder description: " + e.what());
  }
  ladder.validate();
  return ladder;
}

}  // namespace audiodiv
