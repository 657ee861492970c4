// pldakit/scoring.h

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

#ifndef PLDAKIT_SCORING_H_
#define PLDAKIT_SCORING_H_

#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "pldakit/corpus.h"
#include "pldakit/model.h"

namespace pldakit {

/// Which total covariance enters the Q term of the two-covariance
/// log-likelihood-ratio kernel: kBetweenQ uses subspace*subspace^t +
/// between_var (the discriminative variant this toolkit is built around),
/// kWithinQ the classical subspace*subspace^t + within_var.
enum class KernelMode { kBetweenQ, kWithinQ };

/// Precomputed quadratic-form matrices for pairwise scoring:
///   score(x1, x2) = c1^t Q c1 + c2^t Q c2 + 2 c1^t P c2,  c = x - mean.
/// Note the quadratic form carries no 1/2, so the score is twice the
/// two-covariance log-likelihood ratio plus a trial-independent constant;
/// rank metrics are unaffected.
struct ScoringKernel {
  Eigen::MatrixXd q;
  Eigen::MatrixXd p;
  Eigen::VectorXd mean;
  KernelMode mode = KernelMode::kBetweenQ;

  int dim() const { return static_cast<int>(mean.size()); }
};

/// Builds Q and P from the model:
///   tot_w = F F^t + within_var, tot_b = F F^t + between_var, ac = F F^t,
///   coupling = tot_w - ac tot_w^-1 ac,
///   P = tot_w^-1 ac coupling^-1,
///   Q = tot_x^-1 - coupling^-1   (tot_x per mode).
/// Results are symmetrized. Errors name the matrix whose inverse failed.
ScoringKernel build_kernel(const PldaModel& model, KernelMode mode);

double score_pair(const ScoringKernel& kernel, const Eigen::VectorXd& x1,
                  const Eigen::VectorXd& x2);

struct ScoredTrial {
  std::string model_id;
  std::string segment_id;
  double score = 0.0;
};

struct ScoreList {
  std::vector<ScoredTrial> entries;
};

/// How multi-session enrollments collapse to a single comparison:
/// kMeanRenorm averages the model's vectors and length-normalizes the
/// average before one score_pair call; kScoreAverage averages score_pair
/// over the model's vectors.
enum class EnrollPooling { kMeanRenorm, kScoreAverage };

/// Scores every trial; model_id resolves against the models set's speaker
/// ids and segment_id against the tests set's segment ids. Output order
/// matches the trial list. Unresolvable ids raise an error listing up to
/// ten of them.
ScoreList score_trials(const ScoringKernel& kernel,
                       const LabeledVectorSet& models,
                       const LabeledVectorSet& tests, const TrialList& trials,
                       EnrollPooling pooling);

using CohortScoreMap = std::unordered_map<std::string, std::vector<double>>;

/// Symmetric score normalization:
///   s' = 0.5 * ((s - m1)/sd1 + (s - m2)/sd2)
/// with (m1, sd1) the mean/std of the trial model's cohort scores and
/// (m2, sd2) of the segment's. Standard deviations use the population
/// convention (divisor n). Cohort lists must have at least two entries and
/// nonzero variance; violations name the offending id.
ScoreList snorm(const ScoreList& raw, const CohortScoreMap& model_cohorts,
                const CohortScoreMap& segment_cohorts);

/// Scores csv: header "model_id,segment_id,score", 17-significant-digit
/// decimals.
ScoreList load_scores(const std::string& path);
void save_scores(const ScoreList& scores, const std::string& path);

}  // namespace pldakit

#endif  // PLDAKIT_SCORING_H_
