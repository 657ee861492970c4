// tools/pldakit.cc

// Copyright 2026  The pldakit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: gen / train / score / eval / sweep / split.
// Exit codes: 0 success, 1 runtime or data failure, 2 usage or validation
// failure.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pldakit/corpus.h"
#include "pldakit/error.h"
#include "pldakit/metrics.h"
#include "pldakit/plda.h"
#include "pldakit/preprocess.h"
#include "pldakit/rng.h"
#include "pldakit/scoring.h"
#include "pldakit/text.h"

namespace {

using namespace pldakit;

// Thrown for validation problems CLI11 cannot express; mapped to exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

VectorFormat parse_format(const std::string& name) {
  if (name == "csv") return VectorFormat::kCsv;
  if (name == "jsonl") return VectorFormat::kJsonl;
  throw UsageError("unknown vector format '" + name + "'");
}

// Readers pick the format from the file extension.
VectorFormat format_from_path(const std::string& path) {
  return path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl"
             ? VectorFormat::kJsonl
             : VectorFormat::kCsv;
}

LabeledVectorSet load_vector_file(const std::string& path) {
  return load_vectors(path, format_from_path(path));
}

SelectionStrategy parse_selection(const std::string& name) {
  if (name == "nearest") return SelectionStrategy::kNearest;
  if (name == "random") return SelectionStrategy::kRandom;
  throw UsageError("unknown selection strategy '" + name + "'");
}

KernelMode parse_kernel(const std::string& name) {
  if (name == "between") return KernelMode::kBetweenQ;
  if (name == "within") return KernelMode::kWithinQ;
  throw UsageError("unknown kernel mode '" + name + "'");
}

EnrollPooling parse_pooling(const std::string& name) {
  if (name == "mean") return EnrollPooling::kMeanRenorm;
  if (name == "avg-score") return EnrollPooling::kScoreAverage;
  throw UsageError("unknown pooling mode '" + name + "'");
}

// ---------------------------------------------------------------------------
// gen

struct GenOptions {
  int speakers = 0;
  int sessions = 0;
  int dim = 0;
  int rank = 0;
  double noise = 1.0;
  std::uint64_t seed = 0;
  int clusters = 0;
  double cluster_spread = 0.3;
  int test_sessions = 0;
  std::string out;
  std::string test_out;
  std::string trials_out;
  std::string model_out;
  std::string format = "csv";
};

void run_gen(const GenOptions& opt) {
  if (opt.rank > opt.dim) throw UsageError("--rank must not exceed --dim");
  if (!opt.test_out.empty() && opt.test_sessions == 0) {
    throw UsageError("--test-out requires --test-sessions > 0");
  }
  if (!opt.trials_out.empty() && opt.test_sessions == 0) {
    throw UsageError("--trials-out requires --test-sessions > 0");
  }

  SynthConfig cfg;
  cfg.n_speakers = opt.speakers;
  cfg.sessions_per_speaker = opt.sessions;
  cfg.dim = opt.dim;
  cfg.rank = opt.rank;
  cfg.noise_scale = opt.noise;
  cfg.seed = opt.seed;
  cfg.clusters = opt.clusters;
  cfg.cluster_spread = opt.cluster_spread;
  cfg.test_sessions = opt.test_sessions;

  const SynthResult result = generate_synthetic(cfg);
  const VectorFormat format = parse_format(opt.format);
  save_vectors(result.data, opt.out, format);
  if (!opt.test_out.empty()) {
    save_vectors(result.heldout, opt.test_out, format);
  }
  if (!opt.trials_out.empty()) {
    TrialList trials;
    for (const auto& model : result.data.speakers) {
      for (const auto& segment : result.heldout.speakers) {
        for (const auto& seg_id : segment.segment_ids) {
          trials.entries.push_back(
              Trial{model.speaker_id, seg_id,
                    model.speaker_id == segment.speaker_id
                        ? TrialLabel::kTarget
                        : TrialLabel::kNontarget});
        }
      }
    }
    save_trials(trials, opt.trials_out);
  }
  if (!opt.model_out.empty()) {
    save_model(result.truth, nullptr, opt.model_out);
  }
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string in;
  std::string model_out;
  std::string log_out;
  std::string mode;
  int rank = 0;
  double alpha = 1.7;
  int iters = 10;
  std::string select = "nearest";
  std::uint64_t seed = 0;
  int lda_dim = 0;
};

struct TrainedPipeline {
  PldaModel model;
  std::optional<LdaTransform> lda;
  TrainingLog log;
};

TrainedPipeline run_train_pipeline(const LabeledVectorSet& raw,
                                   const TrainOptions& opt) {
  // Fixed order: length-normalize, optional LDA, re-normalize, PLDA.
  LabeledVectorSet normalized = length_normalize_set(raw);
  TrainedPipeline out;
  const LabeledVectorSet* train_set = &normalized;
  LabeledVectorSet projected;
  if (opt.lda_dim > 0) {
    out.lda = fit_lda(normalized, opt.lda_dim);
    projected = apply_transform(*out.lda, normalized, /*renormalize=*/true);
    train_set = &projected;
  }

  TrainConfig cfg;
  cfg.rank = opt.rank;
  cfg.alpha = opt.alpha;
  cfg.iterations = opt.iters;
  cfg.selection = parse_selection(opt.select);
  cfg.seed = opt.seed;

  TrainResult result = opt.mode == "mo" ? train_mo(*train_set, cfg)
                                        : train_so(*train_set, cfg);
  out.model = std::move(result.model);
  out.log = std::move(result.log);
  return out;
}

void write_training_log(const TrainingLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "iteration,f,g,combined\n";
  for (std::size_t i = 0; i < log.iterations.size(); ++i) {
    const auto& rec = log.iterations[i];
    out << (i + 1) << "," << g17(rec.f) << ",";
    if (rec.g) out << g17(*rec.g);
    out << ",";
    if (rec.combined) out << g17(*rec.combined);
    out << "\n";
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

void run_train(const TrainOptions& opt) {
  const LabeledVectorSet raw = load_vector_file(opt.in);
  TrainedPipeline trained = run_train_pipeline(raw, opt);
  save_model(trained.model, trained.lda ? &*trained.lda : nullptr,
             opt.model_out);
  const std::string log_path =
      opt.log_out.empty() ? opt.model_out + ".log.csv" : opt.log_out;
  write_training_log(trained.log, log_path);
}

// ---------------------------------------------------------------------------
// score

struct ScoreOptions {
  std::string model;
  std::string enroll;
  std::string test;
  std::string trials;
  std::string out;
  std::string kernel = "between";
  std::string pooling = "mean";
  std::string snorm_cohort;
  int snorm_size = 200;
};

LabeledVectorSet preprocess_for_model(const std::optional<LdaTransform>& lda,
                                      const LabeledVectorSet& raw) {
  LabeledVectorSet out = length_normalize_set(raw);
  if (lda) out = apply_transform(*lda, out, /*renormalize=*/true);
  return out;
}

// Scores one enrollment (pooled per the configured mode) against a single
// vector.
double score_model_against(const ScoringKernel& kernel,
                           const SpeakerGroup& model_group,
                           const Eigen::VectorXd& pooled_or_unused,
                           EnrollPooling pooling, const Eigen::VectorXd& x) {
  if (pooling == EnrollPooling::kMeanRenorm) {
    return score_pair(kernel, pooled_or_unused, x);
  }
  double sum = 0.0;
  for (const auto& v : model_group.vectors) sum += score_pair(kernel, v, x);
  return sum / static_cast<double>(model_group.vectors.size());
}

// Adaptive cohort statistics: keep the snorm_size highest-scoring cohort
// members per side (ties broken by ascending cohort id).
std::vector<double> top_cohort_scores(
    std::vector<std::pair<double, std::string>> scored, int keep) {
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const std::size_t n = std::min<std::size_t>(
      scored.size(), static_cast<std::size_t>(keep));
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(scored[i].first);
  return out;
}

ScoreList apply_snorm(const ScoringKernel& kernel, const ScoreList& raw,
                      const LabeledVectorSet& enroll,
                      const LabeledVectorSet& tests,
                      const LabeledVectorSet& cohort, EnrollPooling pooling,
                      int snorm_size) {
  if (cohort.num_speakers() < 2) {
    throw Error("snorm cohort needs at least 2 speakers");
  }
  if (snorm_size < 2) throw Error("snorm cohort size must be at least 2");

  // One pooled vector per cohort speaker.
  std::vector<std::pair<std::string, Eigen::VectorXd>> members;
  members.reserve(cohort.speakers.size());
  for (const auto& s : cohort.speakers) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(cohort.dim);
    for (const auto& v : s.vectors) mean += v;
    mean /= static_cast<double>(s.vectors.size());
    members.emplace_back(s.speaker_id, length_normalize(mean));
  }

  std::unordered_map<std::string, const SpeakerGroup*> model_index;
  for (const auto& s : enroll.speakers) model_index.emplace(s.speaker_id, &s);
  std::unordered_map<std::string, Eigen::VectorXd> pooled;
  if (pooling == EnrollPooling::kMeanRenorm) {
    for (const auto& s : enroll.speakers) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(enroll.dim);
      for (const auto& v : s.vectors) mean += v;
      mean /= static_cast<double>(s.vectors.size());
      pooled.emplace(s.speaker_id, length_normalize(mean));
    }
  }
  std::unordered_map<std::string, const Eigen::VectorXd*> segment_index;
  for (const auto& s : tests.speakers) {
    for (std::size_t i = 0; i < s.vectors.size(); ++i) {
      segment_index.emplace(s.segment_ids[i], &s.vectors[i]);
    }
  }

  CohortScoreMap model_cohorts;
  CohortScoreMap segment_cohorts;
  for (const auto& e : raw.entries) {
    if (model_cohorts.find(e.model_id) == model_cohorts.end()) {
      const SpeakerGroup& group = *model_index.at(e.model_id);
      std::vector<std::pair<double, std::string>> scored;
      scored.reserve(members.size());
      const Eigen::VectorXd* pooled_vec =
          pooling == EnrollPooling::kMeanRenorm ? &pooled.at(e.model_id)
                                                : nullptr;
      for (const auto& [id, vec] : members) {
        scored.emplace_back(
            score_model_against(kernel, group,
                                pooled_vec ? *pooled_vec : Eigen::VectorXd(),
                                pooling, vec),
            id);
      }
      model_cohorts.emplace(e.model_id,
                            top_cohort_scores(std::move(scored), snorm_size));
    }
    if (segment_cohorts.find(e.segment_id) == segment_cohorts.end()) {
      const Eigen::VectorXd& segment = *segment_index.at(e.segment_id);
      std::vector<std::pair<double, std::string>> scored;
      scored.reserve(members.size());
      for (const auto& [id, vec] : members) {
        scored.emplace_back(score_pair(kernel, vec, segment), id);
      }
      segment_cohorts.emplace(
          e.segment_id, top_cohort_scores(std::move(scored), snorm_size));
    }
  }
  return snorm(raw, model_cohorts, segment_cohorts);
}

void run_score(const ScoreOptions& opt) {
  const LoadedModel loaded = load_model(opt.model);
  const KernelMode mode = parse_kernel(opt.kernel);
  const EnrollPooling pooling = parse_pooling(opt.pooling);

  const ScoringKernel kernel = build_kernel(loaded.model, mode);
  const LabeledVectorSet enroll = preprocess_for_model(
      loaded.lda, load_vector_file(opt.enroll));
  const LabeledVectorSet tests = preprocess_for_model(
      loaded.lda, load_vector_file(opt.test));
  const TrialList trials = load_trials(opt.trials);

  ScoreList scores = score_trials(kernel, enroll, tests, trials, pooling);
  if (!opt.snorm_cohort.empty()) {
    const LabeledVectorSet cohort = preprocess_for_model(
        loaded.lda, load_vector_file(opt.snorm_cohort));
    scores = apply_snorm(kernel, scores, enroll, tests, cohort, pooling,
                         opt.snorm_size);
  }
  save_scores(scores, opt.out);
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string scores;
  std::string trials;
  std::string det_out;
  double fa_weight = 100.0;
  double miss_weight = 1.0;
};

struct EvalSummary {
  double eer = 0.0;
  double mdcf = 0.0;
  int n_target = 0;
  int n_nontarget = 0;
};

EvalSummary evaluate(const ScoreList& scores, const TrialList& trials,
                     const DcfParams& params, const std::string& det_out) {
  EvalSummary summary;
  for (const auto& t : trials.entries) {
    if (t.label == TrialLabel::kTarget) ++summary.n_target;
    if (t.label == TrialLabel::kNontarget) ++summary.n_nontarget;
  }
  summary.eer = eer(scores, trials);
  summary.mdcf = min_dcf(scores, trials, params);
  if (!det_out.empty()) {
    const auto points = det_points(scores, trials);
    std::ofstream out(det_out);
    if (!out) throw Error("cannot open '" + det_out + "' for writing");
    out << "threshold,p_miss,p_fa\n";
    for (const auto& p : points) {
      out << g17(p.threshold) << "," << g17(p.p_miss) << "," << g17(p.p_fa)
          << "\n";
    }
    if (!out) throw Error("failed writing '" + det_out + "'");
  }
  return summary;
}

void run_eval(const EvalOptions& opt) {
  const ScoreList scores = load_scores(opt.scores);
  const TrialList trials = load_trials(opt.trials);
  DcfParams params;
  params.fa_weight = opt.fa_weight;
  params.miss_weight = opt.miss_weight;
  const EvalSummary s = evaluate(scores, trials, params, opt.det_out);
  std::cout << "n_trials=" << trials.entries.size() << "\n"
            << "n_target=" << s.n_target << "\n"
            << "n_nontarget=" << s.n_nontarget << "\n"
            << "eer=" << g17(s.eer) << "\n"
            << "eer_pct=" << g17(100.0 * s.eer) << "\n"
            << "min_dcf=" << g17(s.mdcf) << "\n"
            << "eer=" << g17(s.eer) << ";min_dcf=" << g17(s.mdcf) << "\n";
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
  std::string in;
  std::string enroll;  // defaults to --in
  std::string test;
  std::string trials;
  std::string out;
  std::string alpha_range;
  std::string rank_range;
  std::string mode = "mo";
  int rank = 0;
  double alpha = 1.7;
  int iters = 10;
  std::string select = "nearest";
  std::uint64_t seed = 0;
  int lda_dim = 0;
  std::string kernel = "between";
  std::string pooling = "mean";
  double fa_weight = 100.0;
  double miss_weight = 1.0;
};

std::vector<double> parse_range(const std::string& text, bool integral) {
  const std::size_t c1 = text.find(':');
  const std::size_t c2 =
      c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw UsageError("range '" + text + "' must look like lo:hi:step");
  }
  auto parse = [&](const std::string& token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || token.empty()) {
      throw UsageError("malformed range component '" + token + "'");
    }
    return v;
  };
  const double lo = parse(text.substr(0, c1));
  const double hi = parse(text.substr(c1 + 1, c2 - c1 - 1));
  const double step = parse(text.substr(c2 + 1));
  if (step <= 0 || hi < lo) throw UsageError("empty sweep range '" + text + "'");

  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double v = lo + i * step;
    if (v > hi + step * 1e-9) break;
    grid.push_back(integral ? std::round(v) : v);
  }
  if (grid.empty()) throw UsageError("empty sweep range '" + text + "'");
  return grid;
}

void run_sweep(const SweepOptions& opt) {
  const bool alpha_sweep = !opt.alpha_range.empty();
  const bool rank_sweep = !opt.rank_range.empty();
  if (alpha_sweep == rank_sweep) {
    throw UsageError("pass exactly one of --alpha-range or --rank-range");
  }
  if (alpha_sweep && opt.mode != "mo") {
    throw UsageError("--alpha-range requires --mode mo");
  }
  if (alpha_sweep && opt.rank <= 0) {
    throw UsageError("--alpha-range requires --rank");
  }

  const std::vector<double> grid =
      parse_range(alpha_sweep ? opt.alpha_range : opt.rank_range, rank_sweep);

  const LabeledVectorSet train_raw = load_vector_file(opt.in);
  const LabeledVectorSet enroll_raw =
      opt.enroll.empty() || opt.enroll == opt.in
          ? train_raw
          : load_vector_file(opt.enroll);
  const LabeledVectorSet test_raw = load_vector_file(opt.test);
  const TrialList trials = load_trials(opt.trials);

  DcfParams params;
  params.fa_weight = opt.fa_weight;
  params.miss_weight = opt.miss_weight;

  std::ofstream out(opt.out);
  if (!out) throw Error("cannot open '" + opt.out + "' for writing");
  out << "param,eer,min_dcf\n";

  for (const double value : grid) {
    TrainOptions train_opt;
    train_opt.mode = opt.mode;
    train_opt.rank = alpha_sweep ? opt.rank : static_cast<int>(value);
    train_opt.alpha = alpha_sweep ? value : opt.alpha;
    train_opt.iters = opt.iters;
    train_opt.select = opt.select;
    train_opt.seed = opt.seed;
    train_opt.lda_dim = opt.lda_dim;

    const TrainedPipeline trained = run_train_pipeline(train_raw, train_opt);
    const ScoringKernel kernel =
        build_kernel(trained.model, parse_kernel(opt.kernel));
    const LabeledVectorSet enroll =
        preprocess_for_model(trained.lda, enroll_raw);
    const LabeledVectorSet tests = preprocess_for_model(trained.lda, test_raw);
    const ScoreList scores = score_trials(kernel, enroll, tests, trials,
                                          parse_pooling(opt.pooling));
    const EvalSummary summary = evaluate(scores, trials, params, "");
    out << g17(value) << "," << g17(summary.eer) << "," << g17(summary.mdcf)
        << "\n";
  }
  if (!out) throw Error("failed writing '" + opt.out + "'");
}

// ---------------------------------------------------------------------------
// split

struct SplitOptions {
  std::string trials;
  std::string out_a;
  std::string out_b;
  double frac = 0.4;
  std::uint64_t seed = 0;
};

void run_split(const SplitOptions& opt) {
  if (!(opt.frac > 0.0 && opt.frac < 1.0)) {
    throw UsageError("--frac must lie strictly between 0 and 1");
  }
  const TrialList trials = load_trials(opt.trials);
  const std::size_t n = trials.entries.size();
  if (n == 0) throw Error(opt.trials + ": no trials to split");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(opt.seed);
  rng.shuffle(order);

  const std::size_t k = static_cast<std::size_t>(
      std::llround(opt.frac * static_cast<double>(n)));
  std::vector<bool> in_a(n, false);
  for (std::size_t i = 0; i < k && i < n; ++i) in_a[order[i]] = true;

  TrialList part_a;
  TrialList part_b;
  for (std::size_t i = 0; i < n; ++i) {
    (in_a[i] ? part_a : part_b).entries.push_back(trials.entries[i]);
  }
  save_trials(part_a, opt.out_a);
  save_trials(part_b, opt.out_b);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pldakit: PLDA speaker-verification backend toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Read options from a key=value config file (flags win)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  GenOptions gen_opt;
  CLI::App* gen = app.add_subcommand(
      "gen", "Generate a synthetic speaker-labelled vector set");
  gen->add_option("--speakers", gen_opt.speakers, "Number of speakers")
      ->required()->check(CLI::PositiveNumber);
  gen->add_option("--sessions", gen_opt.sessions, "Sessions per speaker")
      ->required()->check(CLI::PositiveNumber);
  gen->add_option("--dim", gen_opt.dim, "Vector dimension")
      ->required()->check(CLI::PositiveNumber);
  gen->add_option("--rank", gen_opt.rank, "Speaker-space rank")
      ->required()->check(CLI::PositiveNumber);
  gen->add_option("--noise", gen_opt.noise, "Isotropic noise scale")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_opt.seed, "Random seed");
  gen->add_option("--clusters", gen_opt.clusters,
                  "Group speakers into this many confusable clusters")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--cluster-spread", gen_opt.cluster_spread,
                  "Within-cluster speaker-factor spread")
      ->check(CLI::PositiveNumber);
  gen->add_option("--test-sessions", gen_opt.test_sessions,
                  "Extra held-out sessions per speaker")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--out", gen_opt.out, "Output vectors file")->required();
  gen->add_option("--test-out", gen_opt.test_out,
                  "Output file for held-out sessions");
  gen->add_option("--trials-out", gen_opt.trials_out,
                  "Write the full model x held-out-segment trial list");
  gen->add_option("--model-out", gen_opt.model_out,
                  "Write the ground-truth model");
  gen->add_option("--format", gen_opt.format, "Vector file format")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  TrainOptions train_opt;
  CLI::App* train = app.add_subcommand("train", "Train a PLDA backend");
  train->add_option("--in", train_opt.in, "Training vectors csv")->required();
  train->add_option("--model-out", train_opt.model_out, "Output model file")
      ->required();
  train->add_option("--mode", train_opt.mode,
                    "so = single-objective EM, mo = multi-objective")
      ->required()->check(CLI::IsMember({"so", "mo"}));
  train->add_option("--rank", train_opt.rank, "Speaker-space rank")
      ->required()->check(CLI::PositiveNumber);
  train->add_option("--alpha", train_opt.alpha,
                    "Balance factor for the subspace update (mo)")
      ->check(CLI::PositiveNumber);
  train->add_option("--iters", train_opt.iters, "EM iterations")
      ->check(CLI::PositiveNumber);
  train->add_option("--select", train_opt.select,
                    "Between-class vector selection (mo)")
      ->check(CLI::IsMember({"nearest", "random"}));
  train->add_option("--seed", train_opt.seed, "Seed for random selection");
  train->add_option("--lda-dim", train_opt.lda_dim,
                    "Apply LDA to this dimension before PLDA (0 = off)")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--log-out", train_opt.log_out,
                    "Training-log csv path (default: <model-out>.log.csv)");

  ScoreOptions score_opt;
  CLI::App* score = app.add_subcommand("score", "Score a trial list");
  score->add_option("--model", score_opt.model, "Model file")->required();
  score->add_option("--enroll", score_opt.enroll, "Enrollment vectors csv")
      ->required();
  score->add_option("--test", score_opt.test, "Test vectors csv")->required();
  score->add_option("--trials", score_opt.trials, "Trial list csv")
      ->required();
  score->add_option("--out", score_opt.out, "Output scores csv")->required();
  score->add_option("--kernel", score_opt.kernel, "Q-term covariance choice")
      ->check(CLI::IsMember({"between", "within"}));
  score->add_option("--pooling", score_opt.pooling,
                    "Multi-session enrollment pooling")
      ->check(CLI::IsMember({"mean", "avg-score"}));
  score->add_option("--snorm-cohort", score_opt.snorm_cohort,
                    "Cohort vectors csv; enables symmetric score "
                    "normalization");
  score->add_option("--snorm-size", score_opt.snorm_size,
                    "Cohort members kept per side (adaptive)")
      ->check(CLI::PositiveNumber);

  EvalOptions eval_opt;
  CLI::App* eval = app.add_subcommand("eval", "Compute EER and minDCF");
  eval->add_option("--scores", eval_opt.scores, "Scores csv")->required();
  eval->add_option("--trials", eval_opt.trials, "Labelled trial list csv")
      ->required();
  eval->add_option("--det", eval_opt.det_out, "Write DET points csv");
  eval->add_option("--fa-weight", eval_opt.fa_weight,
                   "False-alarm weight in the detection cost")
      ->check(CLI::PositiveNumber);
  eval->add_option("--miss-weight", eval_opt.miss_weight,
                   "Miss weight in the detection cost")
      ->check(CLI::PositiveNumber);

  SweepOptions sweep_opt;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Train and evaluate across an alpha or rank grid");
  sweep->add_option("--in", sweep_opt.in, "Training vectors csv")->required();
  sweep->add_option("--enroll", sweep_opt.enroll,
                    "Enrollment vectors csv (default: --in)");
  sweep->add_option("--test", sweep_opt.test, "Test vectors csv")->required();
  sweep->add_option("--trials", sweep_opt.trials, "Labelled trial list csv")
      ->required();
  sweep->add_option("--out", sweep_opt.out, "Output csv (param,eer,min_dcf)")
      ->required();
  sweep->add_option("--alpha-range", sweep_opt.alpha_range,
                    "Alpha grid lo:hi:step");
  sweep->add_option("--rank-range", sweep_opt.rank_range,
                    "Rank grid lo:hi:step");
  sweep->add_option("--mode", sweep_opt.mode, "Training mode")
      ->check(CLI::IsMember({"so", "mo"}));
  sweep->add_option("--rank", sweep_opt.rank, "Rank for alpha sweeps")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--alpha", sweep_opt.alpha, "Alpha for rank sweeps")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--iters", sweep_opt.iters, "EM iterations")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--select", sweep_opt.select, "Between-class selection")
      ->check(CLI::IsMember({"nearest", "random"}));
  sweep->add_option("--seed", sweep_opt.seed, "Seed for random selection");
  sweep->add_option("--lda-dim", sweep_opt.lda_dim, "LDA dimension (0 = off)")
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--kernel", sweep_opt.kernel, "Q-term covariance choice")
      ->check(CLI::IsMember({"between", "within"}));
  sweep->add_option("--pooling", sweep_opt.pooling, "Enrollment pooling")
      ->check(CLI::IsMember({"mean", "avg-score"}));
  sweep->add_option("--fa-weight", sweep_opt.fa_weight, "DCF FA weight")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--miss-weight", sweep_opt.miss_weight, "DCF miss weight")
      ->check(CLI::PositiveNumber);

  SplitOptions split_opt;
  CLI::App* split = app.add_subcommand(
      "split", "Partition a trial list into two seeded subsets");
  split->add_option("--trials", split_opt.trials, "Trial list csv")
      ->required();
  split->add_option("--out-a", split_opt.out_a, "First partition (frac)")
      ->required();
  split->add_option("--out-b", split_opt.out_b, "Second partition (rest)")
      ->required();
  split->add_option("--frac", split_opt.frac, "Fraction routed to --out-a");
  split->add_option("--seed", split_opt.seed, "Shuffle seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) run_gen(gen_opt);
    if (train->parsed()) run_train(train_opt);
    if (score->parsed()) run_score(score_opt);
    if (eval->parsed()) run_eval(eval_opt);
    if (sweep->parsed()) run_sweep(sweep_opt);
    if (split->parsed()) run_split(split_opt);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
