// core/src/metrics.cc

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

#include "pldakit/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "pldakit/error.h"

namespace pldakit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Splits joined (scores, trials) into target and nontarget score lists.
// The join is by (model_id, segment_id), so score order need not match
// trial order.
void split_scores(const ScoreList& scores, const TrialList& trials,
                  std::vector<double>* targets,
                  std::vector<double>* nontargets) {
  if (scores.entries.size() != trials.entries.size()) {
    throw Error("metrics: score list and trial list sizes differ");
  }
  std::unordered_map<std::string, TrialLabel> labels;
  labels.reserve(trials.entries.size());
  for (const auto& t : trials.entries) {
    if (!labels.emplace(t.model_id + "\x1f" + t.segment_id, t.label).second) {
      throw Error("metrics: duplicate trial (" + t.model_id + ", " +
                  t.segment_id + ")");
    }
  }
  for (const auto& e : scores.entries) {
    const auto it = labels.find(e.model_id + "\x1f" + e.segment_id);
    if (it == labels.end()) {
      // Also triggered by a duplicated score row: every trial may be
      // consumed exactly once.
      throw Error("metrics: score for unknown or already-scored trial (" +
                  e.model_id + ", " + e.segment_id + ")");
    }
    const TrialLabel label = it->second;
    labels.erase(it);
    switch (label) {
      case TrialLabel::kTarget:
        targets->push_back(e.score);
        break;
      case TrialLabel::kNontarget:
        nontargets->push_back(e.score);
        break;
      case TrialLabel::kUnknown:
        throw Error("metrics: trial (" + e.model_id + ", " + e.segment_id +
                    ") has unknown label");
    }
  }
}

}  // namespace

std::vector<DetPoint> det_points_from(std::vector<double> target_scores,
                                      std::vector<double> nontarget_scores) {
  if (target_scores.empty()) throw Error("metrics: no target trials");
  if (nontarget_scores.empty()) throw Error("metrics: no nontarget trials");
  for (const auto* list : {&target_scores, &nontarget_scores}) {
    for (double s : *list) {
      if (std::isnan(s)) throw Error("metrics: NaN score");
    }
  }

  std::sort(target_scores.begin(), target_scores.end());
  std::sort(nontarget_scores.begin(), nontarget_scores.end());

  std::vector<double> thresholds;
  thresholds.reserve(target_scores.size() + nontarget_scores.size() + 1);
  thresholds.insert(thresholds.end(), target_scores.begin(),
                    target_scores.end());
  thresholds.insert(thresholds.end(), nontarget_scores.begin(),
                    nontarget_scores.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  thresholds.push_back(kInf);  // reject-everything operating point

  const double n_target = static_cast<double>(target_scores.size());
  const double n_nontarget = static_cast<double>(nontarget_scores.size());

  std::vector<DetPoint> points;
  points.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto miss_count = std::lower_bound(target_scores.begin(),
                                             target_scores.end(), t) -
                            target_scores.begin();
    const auto below = std::lower_bound(nontarget_scores.begin(),
                                        nontarget_scores.end(), t) -
                       nontarget_scores.begin();
    DetPoint point;
    point.threshold = t;
    point.p_miss = static_cast<double>(miss_count) / n_target;
    point.p_fa =
        static_cast<double>(nontarget_scores.size() - below) / n_nontarget;
    points.push_back(point);
  }
  return points;
}

double eer_from(std::vector<double> target_scores,
                std::vector<double> nontarget_scores) {
  const auto points =
      det_points_from(std::move(target_scores), std::move(nontarget_scores));
  DetPoint prev = points.front();
  for (const auto& point : points) {
    const double diff = point.p_miss - point.p_fa;
    if (diff == 0.0) return point.p_miss;
    if (diff > 0.0) {
      // Crossing lies between prev (diff < 0) and this point.
      const double lambda =
          (prev.p_fa - prev.p_miss) /
          ((point.p_miss - prev.p_miss) - (point.p_fa - prev.p_fa));
      return prev.p_miss + lambda * (point.p_miss - prev.p_miss);
    }
    prev = point;
  }
  throw Error("metrics: no miss/false-alarm crossing found");
}

double min_dcf_from(std::vector<double> target_scores,
                    std::vector<double> nontarget_scores,
                    const DcfParams& params) {
  if (params.fa_weight <= 0 || params.miss_weight <= 0) {
    throw Error("metrics: DCF weights must be positive");
  }
  const auto points =
      det_points_from(std::move(target_scores), std::move(nontarget_scores));
  double best = kInf;
  for (const auto& point : points) {
    const double cost =
        params.miss_weight * point.p_miss + params.fa_weight * point.p_fa;
    if (cost < best) best = cost;
  }
  return best;
}

std::vector<DetPoint> det_points(const ScoreList& scores,
                                 const TrialList& trials) {
  std::vector<double> targets;
  std::vector<double> nontargets;
  split_scores(scores, trials, &targets, &nontargets);
  return det_points_from(std::move(targets), std::move(nontargets));
}

double eer(const ScoreList& scores, const TrialList& trials) {
  std::vector<double> targets;
  std::vector<double> nontargets;
  split_scores(scores, trials, &targets, &nontargets);
  return eer_from(std::move(targets), std::move(nontargets));
}

double min_dcf(const ScoreList& scores, const TrialList& trials,
               const DcfParams& params) {
  std::vector<double> targets;
  std::vector<double> nontargets;
  split_scores(scores, trials, &targets, &nontargets);
  return min_dcf_from(std::move(targets), std::move(nontargets), params);
}

double top_s_eer(const Eigen::MatrixXd& score_matrix,
                 const std::vector<bool>& is_blacklist) {
  if (score_matrix.rows() == 0 || score_matrix.cols() == 0) {
    throw Error("metrics: empty score matrix");
  }
  if (static_cast<Eigen::Index>(is_blacklist.size()) != score_matrix.rows()) {
    throw Error("metrics: label count does not match matrix rows");
  }
  std::vector<double> targets;
  std::vector<double> nontargets;
  for (Eigen::Index i = 0; i < score_matrix.rows(); ++i) {
    const double detection = score_matrix.row(i).maxCoeff();
    if (is_blacklist[static_cast<std::size_t>(i)]) {
      targets.push_back(detection);
    } else {
      nontargets.push_back(detection);
    }
  }
  return eer_from(std::move(targets), std::move(nontargets));
}

double top_1_eer(const Eigen::MatrixXd& score_matrix,
                 const std::vector<bool>& is_blacklist,
                 const std::vector<int>& true_speaker) {
  if (score_matrix.rows() == 0 || score_matrix.cols() == 0) {
    throw Error("metrics: empty score matrix");
  }
  if (static_cast<Eigen::Index>(is_blacklist.size()) != score_matrix.rows() ||
      static_cast<Eigen::Index>(true_speaker.size()) != score_matrix.rows()) {
    throw Error("metrics: label count does not match matrix rows");
  }
  std::vector<double> targets;
  std::vector<double> nontargets;
  for (Eigen::Index i = 0; i < score_matrix.rows(); ++i) {
    Eigen::Index best_column = 0;
    const double detection = score_matrix.row(i).maxCoeff(&best_column);
    if (is_blacklist[static_cast<std::size_t>(i)]) {
      const int truth = true_speaker[static_cast<std::size_t>(i)];
      if (truth < 0 || truth >= score_matrix.cols()) {
        throw Error("metrics: blacklist trial " + std::to_string(i) +
                    " is missing its true speaker index");
      }
      // A misidentified blacklist trial misses at every threshold but never
      // raises a false alarm.
      targets.push_back(best_column == truth ? detection : -kInf);
    } else {
      nontargets.push_back(detection);
    }
  }
  return eer_from(std::move(targets), std::move(nontargets));
}

}  // namespace pldakit
