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

// The `audiodiv` command line. run() is a library function so that tests can
// drive every subcommand in-process.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
// error.

#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "audiodiv/common.hpp"
#include "audiodiv/degrade.hpp"
#include "audiodiv/kernel_mmd.hpp"
#include "audiodiv/knn_prdc.hpp"
#include "audiodiv/mauve.hpp"
#include "audiodiv/metaeval.hpp"
#include "audiodiv/moments.hpp"
#include "audiodiv/parallel.hpp"
#include "audiodiv/prefstats.hpp"
#include "audiodiv/rank.hpp"
#include "audiodiv/report.hpp"
#include "audiodiv/tensor_io.hpp"

namespace audiodiv {

inline constexpr const char* kVersion = "0.1.0";

namespace cli_detail {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

inline const char* orientation_help() {
  return "Metric orientation:\n"
         "  fad, mmd, mad                                lower-better\n"
         "  mauve, precision, recall, density, coverage  higher-better\n";
}

/// Raw option values shared by several subcommands.
struct Options {
  std::string format = "json";
  bool no_timestamp = false;
  int threads = 0;

  std::string ref, gen, manifest, out, pool = "mean";
  std::string ladder, metric = "fad", prefs, metric_scores, input, output, curve_out, csv_out;
  std::string bandwidth = "median";
  bool clamp_negative = false;
  int k = kDefaultPrdcK;
  std::uint64_t seed = 0;
  std::string clusters = "auto";
  double scale_c = 5.0;
  int grid = 25;
  int restarts = 3;
  int max_iters = 300;
  std::string pca = "off";
  bool oracle_reference = false;
  bool pool_given = false;
  std::vector<Eigen::Index> sizes;
  std::vector<double> sigmas = default_noise_sigmas();
  std::vector<double> probs = default_perturb_probs();
  std::vector<std::string> axes = {"fidelity", "musicality"};
  std::vector<double> xs, ys;
  double tol = 1e-10;
};

inline std::optional<int> parse_auto_int(const std::string& s, const char* off_word, const char* what) {
  if (s == off_word) return std::nullopt;
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError(std::string(what) + " must be '" + off_word + "' or an integer, got '" + s + "'");
  }
}

inline MetricSpec metric_spec(const Options& o) {
  MetricSpec spec;
  spec.id = o.metric;
  metric_orientation(spec.id);
  if (o.bandwidth != "median") {
    try {
      spec.mmd.fixed_bandwidth = std::stod(o.bandwidth);
    } catch (const std::exception&) {
      throw DomainError("--bandwidth must be 'median' or a positive number");
    }
  }
  spec.mmd.clamp_negative = o.clamp_negative;
  spec.mmd.validate();
  spec.prdc_k = o.k;
  spec.mauve.num_clusters = parse_auto_int(o.clusters, "auto", "--clusters");
  spec.mauve.scale_c = o.scale_c;
  spec.mauve.grid_size = o.grid;
  spec.mauve.seed = o.seed;
  spec.mauve.kmeans_restarts = o.restarts;
  spec.mauve.max_iters = o.max_iters;
  spec.mauve.pca_dims = parse_auto_int(o.pca, "off", "--pca");
  spec.mauve.validate();
  return spec;
}

inline std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  detail::write_file_bytes(path, text);
}

class Runner {
 public:
  Runner(const Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {}

  int emit(const std::string& command, nlohmann::json config, nlohmann::json result, const std::string& csv) {
    const ReportFormat fmt = parse_report_format(o_.format);
    nlohmann::json report = {{"command", command},
                             {"config", std::move(config)},
                             {"result", std::move(result)},
                             {"version", kVersion}};
    if (!o_.no_timestamp) report["generated_at"] = timestamp();
    switch (fmt) {
      case ReportFormat::kJson: out_ << dump_json(report); break;
      case ReportFormat::kCsv: out_ << csv; break;
      case ReportFormat::kHuman: out_ << human_report(report); break;
    }
    return kExitOk;
  }

  nlohmann::json base_config() const {
    return {{"format", o_.format}, {"threads", num_threads()}};
  }

  nlohmann::json pair_config(const MetricSpec& spec) const {
    nlohmann::json c = base_config();
    c["ref"] = o_.ref;
    c["gen"] = o_.gen;
    c["pool"] = o_.pool;
    c["metric"] = spec.to_json();
    return c;
  }

  std::pair<EmbeddingSet, EmbeddingSet> load_pair() const {
    const PoolMethod method = parse_pool_method(o_.pool);
    return {load_embedding_set(o_.ref, method, Role::kReference, "reference"),
            load_embedding_set(o_.gen, method, Role::kCandidate, "candidate")};
  }

  int pool_cmd() {
    const PoolMethod method = parse_pool_method(o_.pool);
    const Manifest m = load_manifest(o_.manifest);
    const EmbeddingSet set = assemble_set(m, method, Role::kCandidate, o_.manifest);
    save_matrix(set.data(), o_.out);
    nlohmann::json c = base_config();
    c["manifest"] = o_.manifest;
    c["pool"] = o_.pool;
    c["out"] = o_.out;
    std::string csv = "rows,dim,out\n" + std::to_string(set.size()) + "," + std::to_string(set.dim()) + "," + o_.out + "\n";
    return emit("pool", c, {{"rows", set.size()}, {"dim", set.dim()}, {"out", o_.out}}, csv);
  }

  int score_cmd(const std::string& command) {
    Options o = o_;
    o.metric = command;
    const MetricSpec spec = metric_spec(o);
    auto [ref, gen] = load_pair();
    DivergenceScore s = compute_metric(ref, gen, spec);
    if (command == "mmd" && s.value < 0.0) {
      err_ << "note: the unbiased MMD^2 estimate is negative (" << format_real(s.value)
           << "); this is expected sampling noise when the distributions match\n";
    }
    return emit(command, pair_config(spec), to_json(s, !o_.no_timestamp), score_csv(s));
  }

  int prdc_cmd() {
    auto [ref, gen] = load_pair();
    const PrdcResult r = prdc(ref, gen, o_.k);
    nlohmann::json c = base_config();
    c["ref"] = o_.ref;
    c["gen"] = o_.gen;
    c["pool"] = o_.pool;
    c["k"] = o_.k;
    nlohmann::json result = {{"precision", r.precision}, {"recall", r.recall}, {"density", r.density},
                             {"coverage", r.coverage},   {"k", r.k},           {"orientation", "higher-better"},
                             {"n_ref", ref.size()},      {"n_gen", gen.size()}};
    std::string csv = "metric,value,orientation\n";
    for (const char* name : {"precision", "recall", "density", "coverage"}) {
      csv += std::string(name) + "," + format_real(result[name].get<double>()) + ",higher-better\n";
    }
    return emit("prdc", c, result, csv);
  }

  int mad_cmd() {
    Options o = o_;
    o.metric = "mad";
    const MetricSpec spec = metric_spec(o);
    auto [ref, gen] = load_pair();
    const MauveResult r = mauve(ref, gen, spec.mauve);
    if (!o_.curve_out.empty()) write_text(o_.curve_out, curve_csv(r.curve));
    nlohmann::json result = to_json(r.score, !o_.no_timestamp);
    result["mauve"] = r.mauve;
    result["curve"] = to_json(r.curve);
    nlohmann::json c = pair_config(spec);
    if (!o_.curve_out.empty()) c["curve_out"] = o_.curve_out;
    return emit("mad", c, result, score_csv(r.score));
  }

  DistortionLadder load_ladder_arg() const {
    std::optional<PoolMethod> pool;
    if (o_.pool_given) pool = parse_pool_method(o_.pool);
    DistortionLadder ladder = load_ladder(o_.ladder, pool);
    return o_.oracle_reference ? ladder.with_oracle_reference() : ladder;
  }

  nlohmann::json ladder_config(const MetricSpec& spec) const {
    nlohmann::json c = base_config();
    c["ladder"] = o_.ladder;
    c["pool"] = o_.pool_given ? nlohmann::json(o_.pool) : nlohmann::json("from ladder file");
    c["oracle_reference"] = o_.oracle_reference;
    c["metric"] = spec.to_json();
    return c;
  }

  int metaeval_cmd() {
    const MetricSpec spec = metric_spec(o_);
    const DistortionLadder ladder = load_ladder_arg();
    const MetricRun run = evaluate_ladder(ladder, spec);
    if (!o_.csv_out.empty()) write_text(o_.csv_out, run_csv(run));
    nlohmann::json c = ladder_config(spec);
    if (!o_.csv_out.empty()) c["csv_out"] = o_.csv_out;
    return emit("metaeval", c, to_json(run), run_csv(run));
  }

  int subsample_cmd() {
    const MetricSpec spec = metric_spec(o_);
    const DistortionLadder ladder = load_ladder_arg();
    const auto runs = subsample_run(ladder, spec, o_.sizes, o_.seed);
    nlohmann::json result = nlohmann::json::array();
    std::string csv = "size,tau,p\n";
    for (const auto& r : runs) {
      result.push_back(to_json(r));
      csv += std::to_string(r.subsample_size) + "," + format_real(r.tau) + "," +
             (r.p_value ? format_real(*r.p_value) : "") + "\n";
    }
    nlohmann::json c = ladder_config(spec);
    c["sizes"] = o_.sizes;
    c["seed"] = o_.seed;
    return emit("subsample", c, {{"runs", result}}, csv);
  }

  int degrade_cmd(bool midi) {
    LadderManifest m;
    nlohmann::json c = base_config();
    c["input"] = o_.input;
    c["output"] = o_.output;
    c["seed"] = o_.seed;
    if (midi) {
      MidiPerturbSpec spec;
      spec.probs = o_.probs;
      spec.seed = o_.seed;
      c["probs"] = o_.probs;
      c["pitch_range"] = spec.pitch_range;
      c["time_range"] = spec.time_range;
      m = build_midi_ladder(o_.input, spec, o_.output);
    } else {
      NoiseLadderSpec spec;
      spec.sigmas = o_.sigmas;
      spec.seed = o_.seed;
      c["sigmas"] = o_.sigmas;
      m = build_noise_ladder(o_.input, spec, o_.output);
    }
    std::string csv = "index,param,dir\n";
    for (const auto& l : m.levels) csv += std::to_string(l.index) + "," + format_real(l.param) + "," + l.dir + "\n";
    return emit(midi ? "degrade-midi" : "degrade-noise", c, m.to_json(), csv);
  }

  int bt_cmd() {
    const auto records = load_preferences_csv(o_.prefs);
    std::set<Axis> axes;
    for (const auto& a : o_.axes) axes.insert(parse_axis(a));
    const WinMatrix wins = pool_preferences(records, axes);
    const BtScores bt = bt_fit(wins, o_.tol);

    std::int64_t ties = 0, counted = 0;
    for (const auto& r : records) {
      if (!axes.contains(r.axis)) continue;
      (r.outcome == Outcome::kTie ? ties : counted) += 1;
    }
    nlohmann::json result;
    result["bradley_terry"] = to_json(bt);
    result["win_matrix"] = to_json(wins);
    result["records"] = {{"non_ties", counted}, {"ties_discarded", ties}};

    nlohmann::json sig = nlohmann::json::object();
    const auto p = pairwise_significance(wins);
    for (std::size_t i = 0; i < wins.systems.size(); ++i) {
      for (std::size_t j = 0; j < wins.systems.size(); ++j) {
        if (i == j) continue;
        sig[wins.systems[i]][wins.systems[j]] = p[i][j] ? nlohmann::json(*p[i][j]) : nlohmann::json(nullptr);
      }
    }
    result["pairwise_p"] = {{"values", sig},
                            {"test", "exact two-sided sign test (Wilcoxon signed-rank on +-1 paired outcomes)"}};
    try {
      nlohmann::json bias = nlohmann::json::array();
      for (const auto& b : position_bias_test(records)) {
        bias.push_back({{"axis", to_string(b.axis)},
                        {"non_ties", b.non_ties},
                        {"second_position_wins", b.second_wins},
                        {"proportion_second", b.proportion_second},
                        {"p", b.p}});
      }
      result["position_bias"] = bias;
    } catch (const DegenerateData&) {
      result["position_bias"] = nullptr;
    }
    nlohmann::json agree = nlohmann::json::object();
    auto agreement_json = [](const Agreement& a) {
      return nlohmann::json{{"agreeing", a.agreeing}, {"eligible", a.eligible}, {"fraction", a.fraction}};
    };
    agree["all"] = agreement_json(agreement(records));
    for (Axis a : {Axis::kFidelity, Axis::kMusicality}) agree[std::string(to_string(a))] = agreement_json(agreement(records, a));
    result["agreement"] = agree;

    std::string csv = "system,bt_score\n";
    for (std::size_t i = 0; i < bt.systems.size(); ++i) csv += bt.systems[i] + "," + format_real(bt.scores[i]) + "\n";

    if (!o_.metric_scores.empty()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(detail::read_file_bytes(o_.metric_scores));
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(o_.metric_scores + ": " + e.what());
      }
      nlohmann::json corr = nlohmann::json::object();
      try {
        for (auto it = j.begin(); it != j.end(); ++it) {
          const Orientation orient = parse_orientation(it.value().at("orientation").get<std::string>());
          const auto scores = it.value().at("scores").get<std::map<std::string, double>>();
          const RankCorrelation rc = rank_correlation(scores, orient, bt);
          corr[it.key()] = {{"tau", rc.tau}, {"p", rc.p}, {"p_exact", rc.p_exact}, {"orientation", to_string(orient)}};
        }
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(o_.metric_scores + ": malformed metric score file: " + e.what());
      }
      result["metric_correlation"] = corr;
    }
    nlohmann::json c = base_config();
    c["prefs"] = o_.prefs;
    c["axes"] = o_.axes;
    c["tol"] = o_.tol;
    if (!o_.metric_scores.empty()) c["metric_scores"] = o_.metric_scores;
    return emit("bt-rank", c, result, csv);
  }

  int tau_cmd() {
    const KendallTau kt = kendall_tau_b(o_.xs, o_.ys);
    const TauPValue p = tau_p_exact(o_.xs, o_.ys);
    nlohmann::json flags = nlohmann::json::array();
    if (kt.degenerate) flags.push_back("tau_degenerate");
    if (!p.exact) flags.push_back("p_value_normal_approximation");
    nlohmann::json result = {{"tau", kt.tau},          {"p", p.p},
                             {"p_exact", p.exact},     {"concordant", kt.concordant},
                             {"discordant", kt.discordant}, {"ties_x", kt.ties_x},
                             {"ties_y", kt.ties_y},    {"flags", flags}};
    nlohmann::json c = base_config();
    c["xs"] = o_.xs;
    c["ys"] = o_.ys;
    std::string csv = "tau,p\n" + format_real(kt.tau) + "," + format_real(p.p) + "\n";
    return emit("tau", c, result, csv);
  }

 private:
  const Options& o_;
  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace cli_detail

/// Runs one `audiodiv` invocation. args[0] is the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  Options o;
  CLI::App app{"audiodiv: reference-based divergence metrics for generated audio embeddings", "audiodiv"};
  app.footer(orientation_help());
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv", "human"}));
    sub->add_flag("--no-timestamp", o.no_timestamp, "Omit timestamps and wall times from the report");
    sub->add_option("--threads", o.threads, "Worker threads (default: AUDIODIV_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
  };
  auto add_pair = [&](CLI::App* sub) {
    sub->add_option("--ref", o.ref, "Reference set: manifest .json or pooled N x d .npy")->required();
    sub->add_option("--gen", o.gen, "Candidate set: manifest .json or pooled N x d .npy")->required();
    sub->add_option("--pool", o.pool, "Temporal pooling for manifests")->check(CLI::IsMember({"max", "mean", "last", "first"}));
  };
  auto add_mmd = [&](CLI::App* sub) {
    sub->add_option("--bandwidth", o.bandwidth, "RBF bandwidth: 'median' or a positive number");
    sub->add_flag("--clamp-negative", o.clamp_negative, "Floor the MMD^2 estimate at zero");
  };
  auto add_mauve = [&](CLI::App* sub, bool seed_required) {
    auto* seed = sub->add_option("--seed", o.seed, "k-means seed");
    if (seed_required) seed->required();
    sub->add_option("--clusters", o.clusters, "Cluster count: 'auto' or an integer >= 2");
    sub->add_option("--scale-c", o.scale_c, "Divergence-curve scaling constant c");
    sub->add_option("--grid", o.grid, "Number of mixture weights on the curve");
    sub->add_option("--restarts", o.restarts, "k-means restarts");
    sub->add_option("--max-iters", o.max_iters, "k-means iteration cap");
    sub->add_option("--pca", o.pca, "PCA dimensions before clustering: 'off' or an integer");
  };
  auto add_ladder = [&](CLI::App* sub) {
    sub->add_option("--ladder", o.ladder, "Ladder description JSON")->required();
    sub->add_option("--metric", o.metric, "Metric id")->check(CLI::IsMember(known_metrics()));
    sub->add_option("--pool", o.pool, "Temporal pooling for manifests")->check(CLI::IsMember({"max", "mean", "last", "first"}));
    sub->add_flag("--oracle-reference", o.oracle_reference, "Use level 1 as the reference set");
    sub->add_option("--k", o.k, "k for PRDC metrics")->check(CLI::PositiveNumber);
    add_mmd(sub);
  };

  auto* pool_cmd = app.add_subcommand("pool", "Pool a manifest's frame tensors into an N x d NPY matrix");
  add_common(pool_cmd);
  pool_cmd->add_option("--manifest", o.manifest, "Manifest JSON")->required();
  pool_cmd->add_option("--pool", o.pool, "Temporal pooling")->check(CLI::IsMember({"max", "mean", "last", "first"}));
  pool_cmd->add_option("--out", o.out, "Output .npy path")->required();

  auto* fad_cmd = app.add_subcommand("fad", "Frechet distance between Gaussian fits");
  add_common(fad_cmd);
  add_pair(fad_cmd);

  auto* mmd_cmd = app.add_subcommand("mmd", "Unbiased squared MMD with an RBF kernel");
  add_common(mmd_cmd);
  add_pair(mmd_cmd);
  add_mmd(mmd_cmd);

  auto* prdc_cmd = app.add_subcommand("prdc", "Precision, recall, density and coverage");
  add_common(prdc_cmd);
  add_pair(prdc_cmd);
  prdc_cmd->add_option("--k", o.k, "Nearest-neighbour count")->check(CLI::PositiveNumber);

  auto* mad_cmd = app.add_subcommand("mad", "MAD = -ln(MAUVE) from k-means histograms");
  add_common(mad_cmd);
  add_pair(mad_cmd);
  add_mauve(mad_cmd, true);
  mad_cmd->add_option("--curve-out", o.curve_out, "Write the divergence curve as CSV (lambda,x,y)");

  auto* meta_cmd = app.add_subcommand("metaeval", "Score a distortion ladder and rank-correlate with its levels");
  add_common(meta_cmd);
  add_ladder(meta_cmd);
  add_mauve(meta_cmd, false);
  meta_cmd->add_option("--csv-out", o.csv_out, "Write level,raw_score,normalized_score CSV");

  auto* sub_cmd = app.add_subcommand("subsample", "Meta-evaluate on seeded subsamples of every level");
  add_common(sub_cmd);
  add_ladder(sub_cmd);
  add_mauve(sub_cmd, true);
  sub_cmd->add_option("--sizes", o.sizes, "Subsample sizes")->required()->delimiter(',');

  auto* noise_cmd = app.add_subcommand("degrade-noise", "Build a Gaussian-noise WAV ladder");
  add_common(noise_cmd);
  noise_cmd->add_option("--input", o.input, "Directory of WAV clips")->required();
  noise_cmd->add_option("--output", o.output, "Output root")->required();
  noise_cmd->add_option("--seed", o.seed, "Master seed")->required();
  noise_cmd->add_option("--sigmas", o.sigmas, "Noise standard deviations")->delimiter(',');

  auto* midi_cmd = app.add_subcommand("degrade-midi", "Build a note-perturbation MIDI ladder");
  add_common(midi_cmd);
  midi_cmd->add_option("--input", o.input, "Directory of MIDI files")->required();
  midi_cmd->add_option("--output", o.output, "Output root")->required();
  midi_cmd->add_option("--seed", o.seed, "Master seed")->required();
  midi_cmd->add_option("--probs", o.probs, "Per-note perturbation probabilities")->delimiter(',');

  auto* bt_cmd = app.add_subcommand("bt-rank", "Bradley-Terry ranking and preference statistics");
  add_common(bt_cmd);
  bt_cmd->add_option("--prefs", o.prefs, "Preference CSV")->required();
  bt_cmd->add_option("--axes", o.axes, "Axes to pool")->delimiter(',')->check(CLI::IsMember({"fidelity", "musicality"}));
  bt_cmd->add_option("--metric-scores", o.metric_scores, "JSON of per-system metric scores to correlate");
  bt_cmd->add_option("--tol", o.tol, "Convergence tolerance");

  auto* tau_cmd = app.add_subcommand("tau", "Kendall tau-b with a permutation p-value");
  add_common(tau_cmd);
  tau_cmd->add_option("--xs", o.xs, "First vector")->required()->delimiter(',');
  tau_cmd->add_option("--ys", o.ys, "Second vector")->required()->delimiter(',');

  std::vector<std::string> argv(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  // Seeds are mandatory whenever clustering is involved.
  if (meta_cmd->parsed() && (o.metric == "mad" || o.metric == "mauve") && meta_cmd->count("--seed") == 0) {
    err << "error: --seed is required when --metric is mad or mauve\n" << meta_cmd->help();
    return kExitUsage;
  }

  o.pool_given = meta_cmd->count("--pool") > 0 || sub_cmd->count("--pool") > 0;
  set_num_threads(o.threads);
  Runner runner(o, out, err);
  try {
    if (pool_cmd->parsed()) return runner.pool_cmd();
    if (fad_cmd->parsed()) return runner.score_cmd("fad");
    if (mmd_cmd->parsed()) return runner.score_cmd("mmd");
    if (prdc_cmd->parsed()) return runner.prdc_cmd();
    if (mad_cmd->parsed()) return runner.mad_cmd();
    if (meta_cmd->parsed()) return runner.metaeval_cmd();
    if (sub_cmd->parsed()) return runner.subsample_cmd();
    if (noise_cmd->parsed()) return runner.degrade_cmd(false);
    if (midi_cmd->parsed()) return runner.degrade_cmd(true);
    if (bt_cmd->parsed()) return runner.bt_cmd();
    if (tau_cmd->parsed()) return runner.tau_cmd();
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DataFault& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace audiodiv
