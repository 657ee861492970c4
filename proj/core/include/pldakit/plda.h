// pldakit/plda.h

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

#ifndef PLDAKIT_PLDA_H_
#define PLDAKIT_PLDA_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pldakit/corpus.h"
#include "pldakit/model.h"
#include "pldakit/preprocess.h"

namespace pldakit {

enum class SelectionStrategy { kNearest, kRandom };

/// Per-speaker posterior point estimates of the two factors.
struct SpeakerPosterior {
  Eigen::VectorXd h;  // within-class factor
  Eigen::VectorXd g;  // between-class factor
};

/// For one speaker: the vectors forming its between-class set. Indices refer
/// to the flattened training set (speakers in order, sessions in order). The
/// speaker's own own_count vectors always come first, followed by the
/// other_count selected impostor vectors.
struct SpeakerBetweenSet {
  std::vector<int> indices;
  int own_count = 0;
  int other_count = 0;
};

struct BetweenClassAssignment {
  std::vector<SpeakerBetweenSet> per_speaker;
};

/// Picks, for each speaker, as many impostor vectors as the speaker has own
/// vectors. kNearest ranks all other speakers' vectors by inner product with
/// the speaker's mean vector (descending, ties broken by ascending flat
/// index) and takes the top block; kRandom samples uniformly without
/// replacement from the seeded generator. Fails if any speaker has fewer
/// candidates than it needs.
BetweenClassAssignment select_between_class(const LabeledVectorSet& set,
                                            SelectionStrategy strategy,
                                            std::uint64_t seed);

/// Closed-form posterior mean of the within-class factor given a speaker's
/// vectors: [n F^t W^-1 F + I]^-1 F^t W^-1 sum(x - mean) with W the
/// within-class covariance.
Eigen::VectorXd estep_h(const PldaModel& model,
                        const std::vector<Eigen::VectorXd>& own_vectors);

/// Same closed form with the between-class covariance and the speaker's
/// between-class vector set.
Eigen::VectorXd estep_g(const PldaModel& model,
                        const std::vector<Eigen::VectorXd>& between_vectors);

/// Sufficient statistics accumulated over speakers for one objective side.
/// With v ranging over a speaker's vectors and f its factor estimate:
///   raw   += sum (v - mean)(v - mean)^t          (d x d)
///   cross += (sum (v - mean)) f^t                (d x r)
///   outer += count_s * f f^t                     (r x r)
///   count += count_s
struct MomentStats {
  Eigen::MatrixXd raw;
  Eigen::MatrixXd cross;
  Eigen::MatrixXd outer;
  double count = 0.0;

  static MomentStats zero(int dim, int rank);
  void add_raw(const Eigen::VectorXd& v, const Eigen::VectorXd& mean);
  void add_speaker(const std::vector<const Eigen::VectorXd*>& vectors,
                   const Eigen::VectorXd& mean, const Eigen::VectorXd& factor);
};

/// Subspace update. With between statistics present the update maximizes
/// alpha * (within objective) - (between objective); with them absent the
/// alpha factor drops out and this is the standard single-objective update
/// cross * outer^-1 on count-normalized sums. A singular bracket matrix is
/// reported as an error suggesting a smaller rank.
Eigen::MatrixXd mstep_subspace(const MomentStats& within,
                               const MomentStats* between, double alpha);

/// Covariance re-estimates from the residual moments
///   (raw - cross F^t - F cross^t + F outer F^t) / count,
/// symmetrized and with eigenvalues floored at variance_floor. The second
/// element is present only when between statistics are given.
std::pair<Eigen::MatrixXd, std::optional<Eigen::MatrixXd>> mstep_covariances(
    const MomentStats& within, const MomentStats* between,
    const Eigen::MatrixXd& subspace, double variance_floor);

struct TrainConfig {
  int rank = 0;
  double alpha = 1.7;
  int iterations = 10;
  SelectionStrategy selection = SelectionStrategy::kNearest;
  std::uint64_t seed = 0;
  double variance_floor = 1e-8;

  // Diagnostics. record_state keeps per-iteration subspace/covariance/factor
  // snapshots in the log; zero_between_stats replaces the between-class
  // M-step statistics with zeros (with alpha = 1 this reduces the
  // multi-objective loop to the single-objective one, which is how the
  // equivalence is verified).
  bool record_state = false;
  bool zero_between_stats = false;
};

struct IterationRecord {
  double f = 0.0;                 // within-class log-likelihood objective
  std::optional<double> g;        // between-class objective (multi-objective)
  std::optional<double> combined; // alpha * f - g
};

struct TrainingLog {
  std::vector<IterationRecord> iterations;
  // Filled only when TrainConfig::record_state is set.
  std::vector<Eigen::MatrixXd> subspace_history;
  std::vector<Eigen::MatrixXd> within_var_history;
  std::vector<Eigen::MatrixXd> factor_history;  // rank x n_speakers, h_s
};

struct TrainResult {
  PldaModel model;
  TrainingLog log;
};

/// Single-objective EM. The global mean is fixed to the data mean before the
/// loop; the subspace starts from scaled principal directions of the total
/// covariance and both covariances from half the total covariance. The
/// returned model has between_var set equal to within_var. The logged
/// objective is non-decreasing across iterations.
TrainResult train_so(const LabeledVectorSet& set, const TrainConfig& cfg);

/// Multi-objective training: between-class sets are chosen once up front,
/// then each iteration estimates both factors, updates the shared subspace
/// with balance factor alpha, and re-estimates both covariances. The log
/// carries f, g and alpha * f - g per iteration; no monotonicity is implied
/// for the combined value. Deterministic given the config.
TrainResult train_mo(const LabeledVectorSet& set, const TrainConfig& cfg);

/// Writes model (and optional LDA transform) to a versioned container:
/// a text manifest with an fnv1a-64 payload checksum, then the matrices as
/// little-endian 64-bit floats, row-major. Round-trips bit-exactly.
void save_model(const PldaModel& model, const LdaTransform* lda,
                const std::string& path);

struct LoadedModel {
  PldaModel model;
  std::optional<LdaTransform> lda;
};

LoadedModel load_model(const std::string& path);

}  // namespace pldakit

#endif  // PLDAKIT_PLDA_H_
