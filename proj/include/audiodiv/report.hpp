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

// Report serialization. JSON output has sorted keys and 17 significant
// digits for every real, so equal results always serialize to equal bytes.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "audiodiv/common.hpp"
#include "audiodiv/mauve.hpp"
#include "audiodiv/metaeval.hpp"
#include "audiodiv/prefstats.hpp"
#include "audiodiv/score.hpp"

namespace audiodiv {

enum class ReportFormat { kJson, kCsv, kHuman };

inline ReportFormat parse_report_format(const std::string& s) {
  if (s == "json") return ReportFormat::kJson;
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "human") return ReportFormat::kHuman;
  throw DomainError("unknown format '" + s + "'");
}

inline std::string format_real(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void dump_json(const nlohmann::json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + nlohmann::json(it.key()).dump() + (indent > 0 ? ": " : ":");
        dump_json(it.value(), out, indent, depth + 1);
      }
      out += nl + close_pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) {
          out += ",";
          out += nl;
        }
        out += pad;
        dump_json(j[i], out, indent, depth + 1);
      }
      out += nl + close_pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += format_real(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Stable serialization: sorted keys, %.17g reals, two-space indent.
inline std::string dump_json(const nlohmann::json& j, int indent = 2) {
  std::string out;
  detail::dump_json(j, out, indent, 0);
  out += "\n";
  return out;
}

// ---------------------------------------------------------------------------
// JSON views of result types

inline nlohmann::json to_json(const DivergenceScore& s, bool with_time = true) {
  nlohmann::json j = {{"metric", s.metric},
                      {"value", s.value},
                      {"orientation", to_string(s.orientation)},
                      {"config", s.config},
                      {"n_ref", s.n_ref},
                      {"n_gen", s.n_gen},
                      {"flags", s.flags}};
  if (with_time) j["wall_time_s"] = s.wall_time_s;
  return j;
}

inline nlohmann::json to_json(const MetricRun& r) {
  nlohmann::json j = {{"metric", r.metric},
                      {"orientation", to_string(r.orientation)},
                      {"scores", r.scores},
                      {"normalized_scores", normalize_scores(r.scores).values},
                      {"tau", r.tau},
                      {"p", r.p_value ? nlohmann::json(*r.p_value) : nlohmann::json(nullptr)},
                      {"p_exact", r.p_exact},
                      {"config", r.config},
                      {"flags", r.flags}};
  if (r.subsample_size > 0) j["subsample_size"] = r.subsample_size;
  return j;
}

inline nlohmann::json to_json(const DivergenceCurve& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    pts.push_back({{"lambda", c.lambdas[i]}, {"x", c.points[i].x}, {"y", c.points[i].y}});
  }
  return pts;
}

inline nlohmann::json to_json(const BtScores& bt) {
  nlohmann::json scores = nlohmann::json::object();
  for (std::size_t i = 0; i < bt.systems.size(); ++i) scores[bt.systems[i]] = bt.scores[i];
  return {{"scores", scores}, {"iterations", bt.iterations}};
}

inline nlohmann::json to_json(const WinMatrix& m) {
  nlohmann::json wins = nlohmann::json::object();
  nlohmann::json ties = nlohmann::json::object();
  nlohmann::json rates = nlohmann::json::object();
  for (std::size_t i = 0; i < m.systems.size(); ++i) {
    for (std::size_t j = 0; j < m.systems.size(); ++j) {
      if (i == j) continue;
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      const double total = m.wins(a, b) + m.wins(b, a) + m.ties(a, b);
      wins[m.systems[i]][m.systems[j]] = static_cast<std::int64_t>(m.wins(a, b));
      ties[m.systems[i]][m.systems[j]] = static_cast<std::int64_t>(m.ties(a, b));
      rates[m.systems[i]][m.systems[j]] = total > 0 ? nlohmann::json(m.wins(a, b) / total) : nlohmann::json(nullptr);
    }
  }
  return {{"systems", m.systems}, {"wins", wins}, {"ties", ties}, {"win_rate", rates}};
}

// ---------------------------------------------------------------------------
// CSV views

inline std::string curve_csv(const DivergenceCurve& c) {
  std::string out = "lambda,x,y\n";
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    out += format_real(c.lambdas[i]) + "," + format_real(c.points[i].x) + "," + format_real(c.points[i].y) + "\n";
  }
  return out;
}

/// level,raw_score,normalized_score
inline std::string run_csv(const MetricRun& r) {
  const auto norm = normalize_scores(r.scores);
  std::string out = "level,raw_score,normalized_score\n";
  for (std::size_t i = 0; i < r.scores.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_real(r.scores[i]) + "," + format_real(norm.values[i]) + "\n";
  }
  return out;
}

/// metric,value,orientation,n_ref,n_gen
inline std::string score_csv(const DivergenceScore& s) {
  return "metric,value,orientation,n_ref,n_gen\n" + s.metric + "," + format_real(s.value) + "," +
         std::string(to_string(s.orientation)) + "," + std::to_string(s.n_ref) + "," + std::to_string(s.n_gen) + "\n";
}

// ---------------------------------------------------------------------------
// Human-readable tables

/// Left-aligned first column, right-aligned others.
inline std::string aligned_table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return {};
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out << "  ";
      const std::size_t fill = width[c] - r[c].size();
      if (c == 0) {
        out << r[c] << std::string(c + 1 == r.size() ? 0 : fill, ' ');
      } else {
        out << std::string(fill, ' ') << r[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

inline std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Flattens a JSON object into key/value rows ("a.b" paths).
inline void flatten_json(const nlohmann::json& j, const std::string& prefix,
                         std::vector<std::vector<std::string>>& rows) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten_json(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
    }
  } else if (j.is_number_float()) {
    rows.push_back({prefix, short_real(j.get<double>())});
  } else if (j.is_array() && std::all_of(j.begin(), j.end(), [](const auto& e) { return e.is_number(); })) {
    std::string s;
    for (std::size_t i = 0; i < j.size(); ++i) {
      s += (i ? " " : "") + (j[i].is_number_float() ? short_real(j[i].get<double>()) : j[i].dump());
    }
    rows.push_back({prefix, s});
  } else if (j.is_string()) {
    rows.push_back({prefix, j.get<std::string>()});
  } else {
    rows.push_back({prefix, j.dump()});
  }
}

inline std::string human_report(const nlohmann::json& j) {
  std::vector<std::vector<std::string>> rows;
  flatten_json(j, "", rows);
  return aligned_table(rows);
}

}  // namespace audiodiv
