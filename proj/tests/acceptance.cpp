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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "audiodiv/degrade.hpp"
#include "audiodiv/kernel_mmd.hpp"
#include "audiodiv/knn_prdc.hpp"
#include "audiodiv/mauve.hpp"
#include "audiodiv/metaeval.hpp"
#include "audiodiv/moments.hpp"
#include "audiodiv/prefstats.hpp"
#include "audiodiv/rank.hpp"
#include "degrade_fixtures.hpp"
#include "desk_ladder.hpp"
#include "pref_fixtures.hpp"
#include "prdc_oracle.hpp"
#include "test_util.hpp"

namespace audiodiv {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

std::string fmt(double v, int digits = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Samples n rows of N(mu, cov) for a 2x2 covariance via its Cholesky factor.
Matrix sample_2d(const Vector& mu, const Eigen::Matrix2d& cov, Eigen::Index n, std::uint64_t seed) {
  const Eigen::Matrix2d l = cov.llt().matrixL();
  Matrix z = testing::gaussian(n, 2, seed);
  Matrix x = z * l.transpose();
  x.rowwise() += mu.transpose();
  return x;
}

// Population Frechet distance for 2-D Gaussians. For 2x2 PSD M,
// tr sqrt(M) = sqrt(tr M + 2 sqrt(det M)); sqrt(S1 S2) has the same trace as
// the symmetric form.
double frechet_2d(const Vector& m1, const Eigen::Matrix2d& s1, const Vector& m2, const Eigen::Matrix2d& s2) {
  const Eigen::Matrix2d prod = s1 * s2;
  const double tr_sqrt = std::sqrt(prod.trace() + 2.0 * std::sqrt(s1.determinant() * s2.determinant()));
  return (m1 - m2).squaredNorm() + s1.trace() + s2.trace() - 2.0 * tr_sqrt;
}

void criterion_1(Check& o) {
  const Vector m1 = (Vector(2) << 0.0, 0.0).finished();
  const Vector m2 = (Vector(2) << 6.0, -4.0).finished();
  Eigen::Matrix2d s1, s2;
  s1 << 1.0, 0.5, 0.5, 2.0;
  s2 << 2.0, -0.3, -0.3, 1.0;
  const double truth = frechet_2d(m1, s1, m2, s2);
  const Matrix x = sample_2d(m1, s1, 10000, 11);
  const Matrix y = sample_2d(m2, s2, 10000, 12);
  const auto t0 = Clock::now();
  const double est = frechet_distance(fit_gaussian(x), fit_gaussian(y)).value;
  const double elapsed = seconds_since(t0);
  const double same = frechet_distance(fit_gaussian(x), fit_gaussian(x)).value;
  const double rel = std::abs(est - truth) / truth;
  o.require(rel <= 0.02, "relative error <= 2%");
  o.require(std::abs(same) <= 1e-8, "identical sets give 0");
  o.require(elapsed < 1.0, "runtime < 1 s");
  o.detail << "closed form " << fmt(truth) << ", sampled " << fmt(est) << " (rel err " << fmt(rel, 3)
           << "), identical " << fmt(same, 3) << ", " << fmt(elapsed, 3) << " s";
}

void criterion_2(Check& o) {
  std::vector<double> v;
  for (std::uint64_t t = 0; t < 100; ++t) {
    v.push_back(mmd2_unbiased(testing::gaussian(500, 4, 2 * t + 1), testing::gaussian(500, 4, 2 * t + 2)).value);
  }
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / 100.0;
  double ss = 0.0;
  for (double e : v) ss += (e - mean) * (e - mean);
  const double se = std::sqrt(ss / 99.0) / 10.0;
  Matrix two(2, 3);
  two << 0.1, -2.0, 5.0, 0.1, -2.0, 5.0;
  const double degenerate = mmd2_unbiased(two, two).value;
  o.require(std::abs(mean) <= 3.0 * se, "|mean| <= 3 SE");
  o.require(degenerate == 0.0, "two-point identical case is exactly 0");
  o.detail << "mean MMD^2 " << fmt(mean, 3) << ", SE " << fmt(se, 3) << " (" << fmt(std::abs(mean) / se, 3)
           << " SE), two-point identical " << fmt(degenerate);
}

void criterion_3(Check& o) {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Eigen::Index n = std::uniform_int_distribution<Eigen::Index>(10, 300)(rng);
    const Eigen::Index m = std::uniform_int_distribution<Eigen::Index>(10, 300)(rng);
    const Eigen::Index d = std::uniform_int_distribution<Eigen::Index>(1, 8)(rng);
    const int k = std::array<int, 3>{1, 3, 5}[seed % 3];
    const Matrix x = testing::gaussian(n, d, 1000 + seed);
    const Matrix y = testing::gaussian(m, d, 2000 + seed, 1.5);
    const PrdcResult a = prdc(x, y, k), b = testing::brute_prdc(x, y, k);
    exact += a.precision == b.precision && a.recall == b.recall && a.density == b.density && a.coverage == b.coverage;
  }
  const Matrix x = testing::gaussian(200, 6, 77);
  const PrdcResult same = prdc(x, x, 5);
  o.require(exact == 20, "20/20 instances equal the brute force exactly");
  o.require(same.precision == 1.0 && same.recall == 1.0 && same.coverage == 1.0, "identical sets give 1");
  o.detail << exact << "/20 exact matches; identical sets P/R/C = " << fmt(same.precision) << "/" << fmt(same.recall)
           << "/" << fmt(same.coverage);
}

void criterion_4(Check& o) {
  const Matrix x = testing::gaussian(300, 5, 3);
  MauveConfig cfg;
  cfg.seed = 0;
  const double same = mad(x, x, cfg).value;

  const Matrix a = testing::gaussian(100, 3, 1, 0.01);
  const Matrix b = (testing::gaussian(100, 3, 2, 0.01).array() + 50.0).matrix();
  MauveConfig disjoint;
  disjoint.num_clusters = 2;
  disjoint.scale_c = 5.0;
  disjoint.grid_size = 10000;
  const MauveResult r = mauve(a, b, disjoint);
  const double analytic = 1.0 / 252.0;
  o.require(same <= 1e-9, "identical MAD <= 1e-9");
  o.require(std::abs(r.mauve - analytic) <= 1e-4, "disjoint MAUVE within 1e-4 of 1/252");
  o.detail << "identical MAD " << fmt(same, 3) << "; disjoint MAUVE " << fmt(r.mauve, 8) << " vs " << fmt(analytic, 8)
           << ", MAD " << fmt(r.score.value, 5);
}

void criterion_5(Check& o) {
  const auto t0 = Clock::now();
  const DistortionLadder ladder = testing::desk_ladder();
  MetricSpec mad_spec{"mad"};
  mad_spec.mauve.seed = testing::kDeskSeed;
  for (const MetricSpec& spec : {MetricSpec{"fad"}, MetricSpec{"mmd"}, mad_spec, MetricSpec{"recall"}}) {
    const MetricRun r = evaluate_ladder(ladder, spec);
    o.require(r.tau == 1.0, spec.id + " tau = 1");
    o.detail << spec.id << " tau " << fmt(r.tau, 4) << "; ";
  }
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 120.0, "runtime < 2 min");
  o.detail << fmt(elapsed, 3) << " s";
}

void criterion_6(Check& o) {
  BtScores overall;
  overall.systems = {"MusicGen-L", "MusicGen-M", "MusicGen-S", "MusicLDM", "SAO", "AudioLDM2", "Riffusion v1"};
  overall.scores = {24.24, 17.28, 14.11, 12.17, 11.41, 10.83, 9.97};
  const std::vector<double> mad_col = {2.744, 3.504, 3.928, 4.713, 1.970, 5.321, 5.477};
  const std::vector<double> fad_col = {5.649, 5.802, 6.032, 5.538, 5.547, 5.632, 7.994};
  std::map<std::string, double> mad_map, fad_map;
  for (std::size_t i = 0; i < overall.systems.size(); ++i) {
    mad_map[overall.systems[i]] = mad_col[i];
    fad_map[overall.systems[i]] = fad_col[i];
  }
  const RankCorrelation m = rank_correlation(mad_map, Orientation::kLowerBetter, overall);
  const RankCorrelation f = rank_correlation(fad_map, Orientation::kLowerBetter, overall);
  o.require(m.tau == 13.0 / 21.0, "MAD tau = 13/21");
  o.require(f.tau == 3.0 / 21.0, "FAD tau = 3/21");
  o.require(m.p >= 0.05 && m.p <= 0.10, "MAD p in [0.05, 0.10]");
  o.require(f.p >= 0.70 && f.p <= 0.85, "FAD p in [0.70, 0.85]");
  o.detail << "MAD tau " << fmt(m.tau, 10) << " p " << fmt(m.p, 4) << "; FAD tau " << fmt(f.tau, 10) << " p "
           << fmt(f.p, 4);
}

void criterion_7(Check& o) {
  const auto records = testing::bias_records(1048, 2000, 150, Axis::kFidelity);
  const auto bias = position_bias_test(records);
  const PositionBias& b = bias.at(0);
  o.require(b.non_ties == 2000, "2000 non-ties counted");
  o.require(b.p >= 0.02 && b.p <= 0.05, "p in [0.02, 0.05]");
  o.detail << b.second_wins << "/" << b.non_ties << " second-position wins (" << fmt(100.0 * b.proportion_second, 4)
           << "%), p " << fmt(b.p, 4);
}

void criterion_8(Check& o) {
  const std::vector<double> weights = {4, 7, 10, 13, 16, 22, 28};
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const BtScores s = bt_fit(pool_preferences(testing::bt_tournament(weights, 120, 2026),
                                             {Axis::kFidelity, Axis::kMusicality}));
  double worst = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double truth = 100.0 * weights[i] / total;
    worst = std::max(worst, std::abs(s.scores[i] - truth) / truth);
  }
  const double sum = std::accumulate(s.scores.begin(), s.scores.end(), 0.0);
  o.require(worst < 0.15, "every score within 15%");
  o.require(std::abs(sum - 100.0) <= 1e-9, "scores sum to 100");
  o.detail << "worst relative error " << fmt(100.0 * worst, 3) << "%, sum " << fmt(sum, 17);
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = detail::read_file_bytes(e.path());
  }
  return out;
}

void criterion_9(Check& o) {
  testing::TempDir dir;
  fs::create_directories(dir / "audio");
  fs::create_directories(dir / "midi");
  for (int c = 0; c < 3; ++c) {
    write_wav(testing::tone_wav(100'000, 1, SampleFormat::kFloat32, static_cast<std::uint64_t>(c)),
              dir / "audio" / ("clip" + std::to_string(c) + ".wav"));
  }
  const MidiFile song = testing::spaced_notes_midi(10'000);
  write_midi(song, dir / "midi" / "song.mid");

  NoiseLadderSpec ns;
  ns.seed = 2026;
  MidiPerturbSpec ms;
  ms.seed = 2026;
  build_noise_ladder(dir / "audio", ns, dir / "a" / "noise");
  build_midi_ladder(dir / "midi", ms, dir / "a" / "midi");
  build_noise_ladder(dir / "audio", ns, dir / "b" / "noise");
  build_midi_ladder(dir / "midi", ms, dir / "b" / "midi");

  bool identity = detail::read_file_bytes(dir / "a" / "midi" / "level_01" / "song.mid") ==
                  detail::read_file_bytes(dir / "midi" / "song.mid");
  double worst_std = 0.0;
  for (int c = 0; c < 3; ++c) {
    const std::string name = "clip" + std::to_string(c) + ".wav";
    const std::string src = detail::read_file_bytes(dir / "audio" / name);
    identity = identity && detail::read_file_bytes(dir / "a" / "noise" / "level_01" / name) == src;
    const WavAudio clean = decode_wav(src);
    for (std::size_t l = 1; l < ns.sigmas.size(); ++l) {
      const WavAudio noisy = read_wav(dir / "a" / "noise" / detail::level_dir_name(l + 1) / name);
      std::vector<double> r(clean.samples.size());
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = noisy.samples[i] - clean.samples[i];
      const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
      double ss = 0.0;
      for (double e : r) ss += (e - mean) * (e - mean);
      const double sd = std::sqrt(ss / static_cast<double>(r.size() - 1));
      worst_std = std::max(worst_std, std::abs(sd - ns.sigmas[l]) / ns.sigmas[l]);
    }
  }

  double worst_z = 0.0;
  bool stats_match_files = true;
  for (std::size_t l = 1; l < ms.probs.size(); ++l) {
    PerturbStats st;
    const MidiFile out = perturb_midi(song, ms.probs[l], ms, derive_seed(ms.seed, {l + 1, 0}), &st);
    stats_match_files = stats_match_files &&
                        encode_midi(out) == detail::read_file_bytes(dir / "a" / "midi" / detail::level_dir_name(l + 1) / "song.mid");
    const double p = ms.probs[l];
    const double n = static_cast<double>(st.notes);
    worst_z = std::max(worst_z, std::abs(static_cast<double>(st.selected) - n * p) / std::sqrt(n * p * (1 - p)));
  }
  const bool regenerated = tree_bytes(dir / "a") == tree_bytes(dir / "b");

  o.require(identity, "zero rungs are bit-identical to inputs");
  o.require(worst_std <= 0.05, "residual std within 5%");
  o.require(stats_match_files && worst_z <= 3.0, "perturbed fraction within 3 SD");
  o.require(regenerated, "regeneration is byte-identical");
  o.detail << "zero rungs identical " << (identity ? "yes" : "no") << "; worst residual std error "
           << fmt(100.0 * worst_std, 3) << "%; worst perturbed-fraction z " << fmt(worst_z, 3)
           << "; regeneration identical " << (regenerated ? "yes" : "no");
}

void criterion_10(Check& o) {
  MetricSpec spec{"mad"};
  spec.mauve.seed = testing::kDeskSeed;
  const auto runs = subsample_run(testing::desk_ladder(), spec, {2000, 1000, 500}, testing::kDeskSeed);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    o.require(runs[i].tau >= 0.8, "tau >= 0.8 at size " + std::to_string(runs[i].subsample_size));
    o.detail << (i ? "; " : "") << "N=" << runs[i].subsample_size << " tau " << fmt(runs[i].tau, 4);
  }
}

}  // namespace
}  // namespace audiodiv

int main() {
  using namespace audiodiv;
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"Frechet correctness", criterion_1},
      {"MMD null behavior", criterion_2},
      {"PRDC oracle equivalence", criterion_3},
      {"MAD analytic endpoints", criterion_4},
      {"desk-scale fidelity ladder", criterion_5},
      {"seven-system ranking fixture", criterion_6},
      {"position bias fixture", criterion_7},
      {"Bradley-Terry recovery", criterion_8},
      {"degradation contracts", criterion_9},
      {"sample-efficiency stability", criterion_10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failures += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
