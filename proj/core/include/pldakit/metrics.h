// pldakit/metrics.h

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

#ifndef PLDAKIT_METRICS_H_
#define PLDAKIT_METRICS_H_

#include <vector>

#include <Eigen/Dense>

#include "pldakit/corpus.h"
#include "pldakit/scoring.h"

namespace pldakit {

/// One operating point of the detection trade-off. The decision rule is
/// accept iff score >= threshold, so p_miss is the fraction of targets
/// below the threshold and p_fa the fraction of nontargets at or above it.
struct DetPoint {
  double threshold = 0.0;
  double p_miss = 0.0;
  double p_fa = 0.0;
};

struct DcfParams {
  double fa_weight = 100.0;
  double miss_weight = 1.0;
};

/// Detection points at every distinct score value plus a final reject-all
/// point (threshold +inf, p_miss 1, p_fa 0). Thresholds ascend; p_miss is
/// non-decreasing and p_fa non-increasing along the list. Scores and trials
/// are joined on (model_id, segment_id); unknown labels are an error, as is
/// an empty target or nontarget side.
std::vector<DetPoint> det_points(const ScoreList& scores,
                                 const TrialList& trials);

/// Equal error rate in [0, 1]: the crossing of p_miss and p_fa, linearly
/// interpolated between the two detection points bracketing it (an exact
/// crossing point is returned as-is).
double eer(const ScoreList& scores, const TrialList& trials);

/// Minimum over detection points of miss_weight*p_miss + fa_weight*p_fa,
/// reported unnormalized.
double min_dcf(const ScoreList& scores, const TrialList& trials,
               const DcfParams& params);

/// Multi-target detection: each trial's detection score is the max over the
/// blacklist-speaker columns of its row; returns the EER of those scores
/// against the blacklist/background labels.
double top_s_eer(const Eigen::MatrixXd& score_matrix,
                 const std::vector<bool>& is_blacklist);

/// As top_s_eer, but a blacklist trial whose best-scoring column is not its
/// true speaker is forced to miss at every threshold (its detection score is
/// dropped to -inf; it still never counts as a false alarm).
/// true_speaker[i] must be a valid column index when is_blacklist[i].
double top_1_eer(const Eigen::MatrixXd& score_matrix,
                 const std::vector<bool>& is_blacklist,
                 const std::vector<int>& true_speaker);

// Building blocks on raw target/nontarget score lists; the trial-list
// overloads above delegate here.
std::vector<DetPoint> det_points_from(std::vector<double> target_scores,
                                      std::vector<double> nontarget_scores);
double eer_from(std::vector<double> target_scores,
                std::vector<double> nontarget_scores);
double min_dcf_from(std::vector<double> target_scores,
                    std::vector<double> nontarget_scores,
                    const DcfParams& params);

}  // namespace pldakit

#endif  // PLDAKIT_METRICS_H_
