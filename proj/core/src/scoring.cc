// core/src/scoring.cc

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

#include "pldakit/scoring.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "pldakit/error.h"
#include "pldakit/preprocess.h"
#include "pldakit/text.h"

namespace pldakit {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& m, const char* name) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(std::string("kernel build: ") + name +
                " is not invertible (not positive definite)");
  }
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

double cohort_mean(const std::vector<double>& scores) {
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

// Population convention: divisor n.
double cohort_std(const std::vector<double>& scores, double mean) {
  double sum = 0.0;
  for (double s : scores) sum += (s - mean) * (s - mean);
  return std::sqrt(sum / static_cast<double>(scores.size()));
}

}  // namespace

ScoringKernel build_kernel(const PldaModel& model, KernelMode mode) {
  model.check_valid();

  const Eigen::MatrixXd ac =
      symmetrized(model.subspace * model.subspace.transpose());
  const Eigen::MatrixXd tot_w = symmetrized(ac + model.within_var);
  const Eigen::MatrixXd tot_b = symmetrized(ac + model.between_var);

  const Eigen::MatrixXd tot_w_inv =
      invert_spd(tot_w, "total within-class covariance");
  const Eigen::MatrixXd coupling =
      symmetrized(tot_w - ac * tot_w_inv * ac);
  const Eigen::MatrixXd coupling_inv = invert_spd(coupling, "coupling term");

  Eigen::MatrixXd tot_x_inv;
  if (mode == KernelMode::kBetweenQ) {
    tot_x_inv = invert_spd(tot_b, "total between-class covariance");
  } else {
    tot_x_inv = tot_w_inv;
  }

  ScoringKernel kernel;
  kernel.mode = mode;
  kernel.mean = model.mean;
  kernel.q = symmetrized(tot_x_inv - coupling_inv);
  kernel.p = symmetrized(tot_w_inv * ac * coupling_inv);
  if (!kernel.q.allFinite() || !kernel.p.allFinite()) {
    throw Error("kernel build produced non-finite matrices");
  }
  return kernel;
}

double score_pair(const ScoringKernel& kernel, const Eigen::VectorXd& x1,
                  const Eigen::VectorXd& x2) {
  if (x1.size() != kernel.dim() || x2.size() != kernel.dim()) {
    throw Error("score_pair: vector dimension does not match the kernel");
  }
  const Eigen::VectorXd c1 = x1 - kernel.mean;
  const Eigen::VectorXd c2 = x2 - kernel.mean;
  // The cross term is accumulated from both orderings so that swapping the
  // arguments produces the bit-identical score.
  return c1.dot(kernel.q * c1) + c2.dot(kernel.q * c2) +
         (c1.dot(kernel.p * c2) + c2.dot(kernel.p * c1));
}

ScoreList score_trials(const ScoringKernel& kernel,
                       const LabeledVectorSet& models,
                       const LabeledVectorSet& tests, const TrialList& trials,
                       EnrollPooling pooling) {
  models.check_valid();
  tests.check_valid();
  if (models.dim != kernel.dim() || tests.dim != kernel.dim()) {
    throw Error("score_trials: set dimension does not match the kernel");
  }

  std::unordered_map<std::string, const SpeakerGroup*> model_index;
  for (const auto& s : models.speakers) model_index.emplace(s.speaker_id, &s);

  std::unordered_map<std::string, const Eigen::VectorXd*> segment_index;
  for (const auto& s : tests.speakers) {
    for (std::size_t i = 0; i < s.vectors.size(); ++i) {
      if (!segment_index.emplace(s.segment_ids[i], &s.vectors[i]).second) {
        throw Error("score_trials: segment id '" + s.segment_ids[i] +
                    "' is ambiguous in the test set");
      }
    }
  }

  std::vector<std::string> missing;
  std::set<std::string> missing_seen;
  auto note_missing = [&](const std::string& kind, const std::string& id) {
    if (missing.size() < 10 && missing_seen.insert(kind + id).second) {
      missing.push_back(kind + " '" + id + "'");
    }
  };
  for (const auto& t : trials.entries) {
    if (model_index.find(t.model_id) == model_index.end()) {
      note_missing("model", t.model_id);
    }
    if (segment_index.find(t.segment_id) == segment_index.end()) {
      note_missing("segment", t.segment_id);
    }
  }
  if (!missing.empty()) {
    std::string msg = "score_trials: unresolved ids:";
    for (const auto& m : missing) msg += " " + m;
    throw Error(msg);
  }

  // Pooled enrollment vectors, computed once per model.
  std::unordered_map<std::string, Eigen::VectorXd> pooled;
  if (pooling == EnrollPooling::kMeanRenorm) {
    for (const auto& s : models.speakers) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(models.dim);
      for (const auto& v : s.vectors) mean += v;
      mean /= static_cast<double>(s.vectors.size());
      pooled.emplace(s.speaker_id, length_normalize(mean));
    }
  }

  ScoreList scores;
  scores.entries.reserve(trials.entries.size());
  for (const auto& t : trials.entries) {
    const SpeakerGroup& group = *model_index.at(t.model_id);
    const Eigen::VectorXd& segment = *segment_index.at(t.segment_id);
    double score = 0.0;
    if (pooling == EnrollPooling::kMeanRenorm) {
      score = score_pair(kernel, pooled.at(t.model_id), segment);
    } else {
      for (const auto& v : group.vectors) {
        score += score_pair(kernel, v, segment);
      }
      score /= static_cast<double>(group.vectors.size());
    }
    scores.entries.push_back(ScoredTrial{t.model_id, t.segment_id, score});
  }
  return scores;
}

ScoreList snorm(const ScoreList& raw, const CohortScoreMap& model_cohorts,
                const CohortScoreMap& segment_cohorts) {
  auto stats_for = [](const CohortScoreMap& cohorts, const std::string& id,
                      const char* side) {
    const auto it = cohorts.find(id);
    if (it == cohorts.end() || it->second.size() < 2) {
      throw Error(std::string("snorm: ") + side + " '" + id +
                  "' has fewer than 2 cohort scores");
    }
    const double mean = cohort_mean(it->second);
    const double sd = cohort_std(it->second, mean);
    if (sd == 0.0) {
      throw Error(std::string("snorm: ") + side + " '" + id +
                  "' has zero cohort score variance");
    }
    return std::pair<double, double>(mean, sd);
  };

  ScoreList normalized;
  normalized.entries.reserve(raw.entries.size());
  for (const auto& e : raw.entries) {
    const auto [m1, sd1] = stats_for(model_cohorts, e.model_id, "model");
    const auto [m2, sd2] = stats_for(segment_cohorts, e.segment_id, "segment");
    const double value =
        0.5 * ((e.score - m1) / sd1 + (e.score - m2) / sd2);
    normalized.entries.push_back(ScoredTrial{e.model_id, e.segment_id, value});
  }
  return normalized;
}

ScoreList load_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty score file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "model_id,segment_id,score") {
    throw Error(path + ": malformed header, expected "
                "'model_id,segment_id,score'");
  }
  ScoreList scores;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string::npos
                               ? std::string::npos
                               : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw Error(path + ": data row " + std::to_string(row) +
                  ": expected 3 fields");
    }
    const std::string token = line.substr(c2 + 1);
    double value = 0.0;
    const auto result =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (result.ec != std::errc() ||
        result.ptr != token.data() + token.size()) {
      throw Error(path + ": data row " + std::to_string(row) +
                  ": malformed score '" + token + "'");
    }
    scores.entries.push_back(ScoredTrial{
        line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1), value});
  }
  return scores;
}

void save_scores(const ScoreList& scores, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "model_id,segment_id,score\n";
  for (const auto& e : scores.entries) {
    out << e.model_id << "," << e.segment_id << "," << g17(e.score) << "\n";
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace pldakit
