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

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "audiodiv/common.hpp"

namespace audiodiv {

/// A metric value together with everything needed to reproduce it.
struct DivergenceScore {
  std::string metric;
  double value = 0.0;
  Orientation orientation = Orientation::kLowerBetter;
  nlohmann::json config = nlohmann::json::object();
  std::int64_t n_ref = 0;
  std::int64_t n_gen = 0;
  double wall_time_s = 0.0;
  std::vector<std::string> flags;
};

/// Hard-coded orientation table. Unknown ids throw.
inline Orientation metric_orientation(const std::string& metric) {
  if (metric == "fad" || metric == "mmd" || metric == "mad") return Orientation::kLowerBetter;
  if (metric == "precision" || metric == "recall" || metric == "density" || metric == "coverage" ||
      metric == "mauve") {
    return Orientation::kHigherBetter;
  }
  throw DomainError("unknown metric '" + metric + "'");
}

inline const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> ids = {"fad",    "mmd",     "mad",     "mauve",
                                               "precision", "recall", "density", "coverage"};
  return ids;
}

}  // namespace audiodiv
