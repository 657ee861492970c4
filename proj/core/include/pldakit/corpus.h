// pldakit/corpus.h

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

#ifndef PLDAKIT_CORPUS_H_
#define PLDAKIT_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pldakit/model.h"

namespace pldakit {

/// One speaker's enrollment/training material: parallel lists of segment ids
/// and fixed-dimension vectors.
struct SpeakerGroup {
  std::string speaker_id;
  std::vector<std::string> segment_ids;
  std::vector<Eigen::VectorXd> vectors;
};

/// Speaker-labelled vector collection. Immutable by convention once built;
/// all pipeline stages produce new sets instead of mutating.
struct LabeledVectorSet {
  int dim = 0;
  std::vector<SpeakerGroup> speakers;

  int num_speakers() const { return static_cast<int>(speakers.size()); }
  int total_vectors() const;
  Eigen::VectorXd global_mean() const;  // mean over all vectors

  /// Throws Error if any invariant is violated: consistent dimension,
  /// unique speaker ids, at least one vector per speaker, matching
  /// segment-id/vector counts.
  void check_valid() const;
};

enum class TrialLabel { kTarget, kNontarget, kUnknown };

struct Trial {
  std::string model_id;
  std::string segment_id;
  TrialLabel label = TrialLabel::kUnknown;
};

struct TrialList {
  std::vector<Trial> entries;
};

enum class VectorFormat { kCsv, kJsonl };

/// Reads a vector set. csv: header "speaker_id,segment_id,v0,...", one row
/// per vector. jsonl: one {"speaker_id":..,"segment_id":..,"vector":[..]}
/// object per line. Speakers are ordered by first appearance and row order
/// is preserved within a speaker. Errors carry the offending data-row
/// number.
LabeledVectorSet load_vectors(const std::string& path, VectorFormat format);

/// Writes the set in the given format; csv uses 17-significant-digit
/// decimals so a save/load round trip is lossless.
void save_vectors(const LabeledVectorSet& set, const std::string& path,
                  VectorFormat format);

/// Reads a trial list: csv with header "model_id,segment_id,label" and
/// labels in {target, nontarget, unknown}. Duplicate (model_id, segment_id)
/// pairs and unrecognized label tokens are errors.
TrialList load_trials(const std::string& path);

void save_trials(const TrialList& trials, const std::string& path);

/// Configuration for the synthetic sampler. Beyond the generative basics,
/// speakers may be grouped into confusable clusters (speaker factors drawn
/// around shared cluster centres) and extra held-out sessions can be drawn
/// per speaker for building evaluation trials.
struct SynthConfig {
  int n_speakers = 0;
  int sessions_per_speaker = 0;
  int dim = 0;
  int rank = 0;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
  int clusters = 0;            // 0 = independent speaker factors
  double cluster_spread = 0.3; // intra-cluster factor spread when clustered
  int test_sessions = 0;       // extra held-out sessions per speaker
};

struct SynthResult {
  LabeledVectorSet data;             // sessions_per_speaker vectors each
  LabeledVectorSet heldout;          // test_sessions vectors each (may be empty)
  PldaModel truth;                   // mean 0, sampled subspace, isotropic noise
  Eigen::MatrixXd speaker_factors;   // rank x n_speakers
};

/// Samples x = subspace * h_s + noise with a fixed draw order, so the output
/// is a pure function of the config: subspace entries row-major, then
/// cluster centres, then per speaker the factor and its sessions (held-out
/// sessions directly after the training ones). See Rng for the generator
/// contract.
SynthResult generate_synthetic(const SynthConfig& cfg);

}  // namespace pldakit

#endif  // PLDAKIT_CORPUS_H_
