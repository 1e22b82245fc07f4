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

// Pairwise human preference analysis: win matrices, Bradley-Terry strengths,
// sign/binomial tests, annotator agreement and metric-vs-human rank
// correlation.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "audiodiv/common.hpp"
#include "audiodiv/rank.hpp"

namespace audiodiv {

enum class Axis { kFidelity, kMusicality };
enum class Outcome { kA, kB, kTie };

inline std::string_view to_string(Axis a) { return a == Axis::kFidelity ? "fidelity" : "musicality"; }

inline Axis parse_axis(std::string_view s) {
  if (s == "fidelity") return Axis::kFidelity;
  if (s == "musicality") return Axis::kMusicality;
  throw DataError("unknown axis '" + std::string(s) + "'");
}

inline Outcome parse_outcome(std::string_view s) {
  if (s == "A") return Outcome::kA;
  if (s == "B") return Outcome::kB;
  if (s == "tie") return Outcome::kTie;
  throw DataError("unknown outcome '" + std::string(s) + "' (expected A, B or tie)");
}

struct PreferenceRecord {
  std::string pair_id;
  std::string system_a;
  std::string system_b;
  Axis axis = Axis::kFidelity;
  Outcome outcome = Outcome::kTie;
  std::string annotator;
  bool position_a_first = true;

  const std::string* winner() const {
    if (outcome == Outcome::kA) return &system_a;
    if (outcome == Outcome::kB) return &system_b;
    return nullptr;
  }
};

struct WinMatrix {
  std::vector<std::string> systems;
  Eigen::MatrixXd wins;  ///< wins(i, j): times i beat j
  Eigen::MatrixXd ties;  ///< ties(i, j) == ties(j, i); metadata only

  Eigen::Index index_of(const std::string& name) const {
    auto it = std::find(systems.begin(), systems.end(), name);
    if (it == systems.end()) throw DataError("unknown system '" + name + "'");
    return it - systems.begin();
  }
};

/// Sorted list of all system names appearing in the records.
inline std::vector<std::string> systems_in(const std::vector<PreferenceRecord>& records) {
  std::set<std::string> names;
  for (const auto& r : records) {
    names.insert(r.system_a);
    names.insert(r.system_b);
  }
  return {names.begin(), names.end()};
}

/// Counts non-tie judgments on the requested axes. Ties are tallied
/// separately and never enter `wins`.
inline WinMatrix pool_preferences(const std::vector<PreferenceRecord>& records, const std::set<Axis>& axes,
                                  std::vector<std::string> systems = {}) {
  if (systems.empty()) systems = systems_in(records);
  WinMatrix m;
  m.systems = std::move(systems);
  const auto s = static_cast<Eigen::Index>(m.systems.size());
  m.wins = Eigen::MatrixXd::Zero(s, s);
  m.ties = Eigen::MatrixXd::Zero(s, s);
  for (const auto& r : records) {
    if (r.system_a == r.system_b) throw DataError("record '" + r.pair_id + "' compares a system with itself");
    const Eigen::Index a = m.index_of(r.system_a);
    const Eigen::Index b = m.index_of(r.system_b);
    if (!axes.contains(r.axis)) continue;
    switch (r.outcome) {
      case Outcome::kA: m.wins(a, b) += 1; break;
      case Outcome::kB: m.wins(b, a) += 1; break;
      case Outcome::kTie:
        m.ties(a, b) += 1;
        m.ties(b, a) += 1;
        break;
    }
  }
  return m;
}

struct BtScores {
  std::vector<std::string> systems;
  std::vector<double> scores;  ///< sum to 100
  int iterations = 0;
};

namespace detail {

inline std::vector<char> reachable(const Eigen::MatrixXd& adj, Eigen::Index start) {
  std::vector<char> seen(static_cast<std::size_t>(adj.rows()), 0);
  std::vector<Eigen::Index> stack{start};
  seen[static_cast<std::size_t>(start)] = 1;
  while (!stack.empty()) {
    Eigen::Index u = stack.back();
    stack.pop_back();
    for (Eigen::Index v = 0; v < adj.cols(); ++v) {
      if (adj(u, v) > 0 && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace detail

/// Bradley-Terry maximum likelihood by minorization-maximization:
///   w_i <- W_i / sum_{j != i} n_ij / (w_i + w_j),
/// renormalised each sweep, until the largest relative change is below tol.
/// The MLE exists only when the "beat" graph is strongly connected.
inline BtScores bt_fit(const WinMatrix& m, double tol = 1e-10, int max_iters = 100000) {
  const Eigen::Index s = static_cast<Eigen::Index>(m.systems.size());
  if (s < 2) throw DegenerateData("Bradley-Terry needs at least 2 systems");
  for (Eigen::Index i = 0; i < s; ++i) {
    if (m.wins.row(i).sum() <= 0) throw DegenerateData("system '" + m.systems[static_cast<std::size_t>(i)] + "' has no wins");
    if (m.wins.col(i).sum() <= 0) throw DegenerateData("system '" + m.systems[static_cast<std::size_t>(i)] + "' has no losses");
  }
  const auto forward = detail::reachable(m.wins, 0);
  const auto backward = detail::reachable(m.wins.transpose(), 0);
  for (Eigen::Index i = 0; i < s; ++i) {
    if (!forward[static_cast<std::size_t>(i)] || !backward[static_cast<std::size_t>(i)]) {
      throw DegenerateData("comparison graph is not strongly connected: '" +
                           m.systems[static_cast<std::size_t>(i)] + "' is cut off from '" + m.systems[0] + "'");
    }
  }
  const Eigen::MatrixXd games = m.wins + m.wins.transpose();
  const Vector total_wins = m.wins.rowwise().sum();
  Vector w = Vector::Constant(s, 1.0 / static_cast<double>(s));
  BtScores out;
  out.systems = m.systems;
  int it = 0;
  for (; it < max_iters; ++it) {
    Vector next(s);
    for (Eigen::Index i = 0; i < s; ++i) {
      double denom = 0.0;
      for (Eigen::Index j = 0; j < s; ++j) {
        if (j != i && games(i, j) > 0) denom += games(i, j) / (w[i] + w[j]);
      }
      next[i] = total_wins[i] / denom;
    }
    next /= next.sum();
    const double change = ((next - w).array().abs() / w.array()).maxCoeff();
    w = next;
    if (change < tol) {
      ++it;
      break;
    }
  }
  if (it >= max_iters) throw NumericalError("Bradley-Terry did not converge in " + std::to_string(max_iters) + " iterations");
  out.iterations = it;
  w *= 100.0 / w.sum();
  out.scores.assign(w.data(), w.data() + w.size());
  return out;
}

struct RankCorrelation {
  double tau = 0.0;
  double p = 1.0;
  bool p_exact = true;
};

/// Orientation-corrected tau-b between per-system metric values and human
/// Bradley-Terry scores (higher human score = better), with an exact
/// permutation p-value.
inline RankCorrelation rank_correlation(const std::map<std::string, double>& metric_scores,
                                        Orientation orientation, const BtScores& bt) {
  if (metric_scores.size() != bt.systems.size()) throw DomainError("rank_correlation: system sets differ");
  std::vector<double> metric, human;
  for (std::size_t i = 0; i < bt.systems.size(); ++i) {
    auto it = metric_scores.find(bt.systems[i]);
    if (it == metric_scores.end()) throw DomainError("rank_correlation: no metric score for '" + bt.systems[i] + "'");
    metric.push_back(it->second);
    human.push_back(bt.scores[i]);
  }
  const double sign = orientation == Orientation::kHigherBetter ? 1.0 : -1.0;
  const TauPValue p = tau_p_exact(metric, human);
  return {sign * kendall_tau(metric, human), p.p, p.exact};
}

struct PositionBias {
  Axis axis = Axis::kFidelity;
  std::int64_t non_ties = 0;
  std::int64_t second_wins = 0;
  double proportion_second = 0.0;
  double p = 1.0;
};

/// Per axis: exact two-sided binomial test that the second-presented
/// recording wins half of the non-tie judgments.
inline std::vector<PositionBias> position_bias_test(const std::vector<PreferenceRecord>& records) {
  std::vector<PositionBias> out;
  for (Axis axis : {Axis::kFidelity, Axis::kMusicality}) {
    PositionBias b;
    b.axis = axis;
    for (const auto& r : records) {
      if (r.axis != axis || r.outcome == Outcome::kTie) continue;
      ++b.non_ties;
      const bool second_won = r.position_a_first ? r.outcome == Outcome::kB : r.outcome == Outcome::kA;
      b.second_wins += second_won;
    }
    if (b.non_ties == 0) continue;
    b.proportion_second = static_cast<double>(b.second_wins) / static_cast<double>(b.non_ties);
    b.p = binomial_test_two_sided(b.second_wins, b.non_ties);
    out.push_back(b);
  }
  if (out.empty()) throw DegenerateData("position bias test: no non-tie records");
  return out;
}

/// Two-sided exact sign test for every ordered pair. Applied to +-1 paired
/// differences the Wilcoxon signed-rank test reduces to this. Pairs with no
/// decisive comparisons get no p-value.
inline std::vector<std::vector<std::optional<double>>> pairwise_significance(const WinMatrix& m) {
  const auto s = static_cast<std::size_t>(m.systems.size());
  std::vector<std::vector<std::optional<double>>> p(s, std::vector<std::optional<double>>(s));
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      if (i == j) continue;
      const auto a = static_cast<std::int64_t>(m.wins(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      const auto b = static_cast<std::int64_t>(m.wins(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)));
      if (a + b > 0) p[i][j] = binomial_test_two_sided(a, a + b);
    }
  }
  return p;
}

struct Agreement {
  std::int64_t agreeing = 0;
  std::int64_t eligible = 0;
  double fraction = 0.0;
};

/// True-majority agreement: ties are dropped, pairs with fewer than two
/// remaining votes are ignored, and a pair agrees when at least two votes
/// name the same winner. Records are grouped by (pair_id, axis).
inline Agreement agreement(const std::vector<PreferenceRecord>& records,
                           std::optional<Axis> only_axis = std::nullopt) {
  std::map<std::pair<std::string, int>, std::map<std::string, int>> votes;
  for (const auto& r : records) {
    if (only_axis && r.axis != *only_axis) continue;
    const std::string* w = r.winner();
    if (!w) continue;
    ++votes[{r.pair_id, static_cast<int>(r.axis)}][*w];
  }
  Agreement a;
  for (const auto& [key, tally] : votes) {
    int total = 0, top = 0;
    for (const auto& [winner, count] : tally) {
      total += count;
      top = std::max(top, count);
    }
    if (total < 2) continue;
    ++a.eligible;
    if (top >= 2) ++a.agreeing;
  }
  a.fraction = a.eligible > 0 ? static_cast<double>(a.agreeing) / static_cast<double>(a.eligible) : 0.0;
  return a;
}

// ---------------------------------------------------------------------------
// Preference CSV: pair_id,system_a,system_b,axis,outcome,annotator,position_a_first

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline bool parse_bool_field(const std::string& s) {
  if (s == "true" || s == "True" || s == "1") return true;
  if (s == "false" || s == "False" || s == "0") return false;
  throw DataError("invalid boolean '" + s + "'");
}

}  // namespace detail

inline std::vector<PreferenceRecord> parse_preferences_csv(std::istream& in, const std::string& where = "<csv>") {
  static const std::vector<std::string> kHeader = {"pair_id", "system_a",  "system_b",        "axis",
                                                   "outcome", "annotator", "position_a_first"};
  std::string line;
  if (!std::getline(in, line)) throw FormatError(where + ": empty preference file");
  if (detail::split_csv_line(line) != kHeader) {
    throw FormatError(where + ": header must be pair_id,system_a,system_b,axis,outcome,annotator,position_a_first");
  }
  std::vector<PreferenceRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != kHeader.size()) {
      throw FormatError(where + ":" + std::to_string(lineno) + ": expected 7 fields, got " + std::to_string(f.size()));
    }
    try {
      PreferenceRecord r{f[0], f[1], f[2], parse_axis(f[3]), parse_outcome(f[4]), f[5], detail::parse_bool_field(f[6])};
      if (r.system_a == r.system_b) throw DataError("system_a equals system_b");
      records.push_back(std::move(r));
    } catch (const DataError& e) {
      throw DataError(where + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

inline std::vector<PreferenceRecord> load_preferences_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_preferences_csv(in, path.string());
}

inline void write_preferences_csv(std::ostream& out, const std::vector<PreferenceRecord>& records) {
  out << "pair_id,system_a,system_b,axis,outcome,annotator,position_a_first\n";
  for (const auto& r : records) {
    out << r.pair_id << ',' << r.system_a << ',' << r.system_b << ',' << to_string(r.axis) << ','
        << (r.outcome == Outcome::kA ? "A" : r.outcome == Outcome::kB ? "B" : "tie") << ',' << r.annotator << ','
        << (r.position_a_first ? "true" : "false") << '\n';
  }
}

}  // namespace audiodiv
