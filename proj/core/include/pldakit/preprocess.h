// pldakit/preprocess.h

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

#ifndef PLDAKIT_PREPROCESS_H_
#define PLDAKIT_PREPROCESS_H_

#include <vector>

#include <Eigen/Dense>

#include "pldakit/corpus.h"

namespace pldakit {

struct ScatterStats {
  Eigen::MatrixXd within;                     // Sw
  Eigen::MatrixXd between;                    // Sb
  Eigen::VectorXd mean;                       // unweighted mean of class means
  std::vector<Eigen::VectorXd> class_means;   // one per speaker, set order
};

/// Within- and between-class scatter. Sw sums squared deviations of every
/// vector from its class mean; Sb sums squared deviations of the class means
/// from their unweighted average (no per-class size weights). Needs at least
/// two speakers.
ScatterStats compute_scatter(const LabeledVectorSet& set);

/// Linear discriminant projection: rows are generalized eigenvectors of the
/// (Sb, Sw) pencil, eigenvalue-descending.
struct LdaTransform {
  Eigen::VectorXd mean;        // subtracted before projecting
  Eigen::MatrixXd projection;  // out_dim x in_dim

  int in_dim() const { return static_cast<int>(projection.cols()); }
  int out_dim() const { return static_cast<int>(projection.rows()); }
};

/// Fits LDA with out_dim <= min(dim, num_speakers - 1). Sw is ridged with
/// 1e-6 * trace(Sw)/dim before the pencil solve. Row signs follow the
/// first-nonzero-coordinate-positive convention so results serialize
/// deterministically.
LdaTransform fit_lda(const LabeledVectorSet& set, int out_dim);

/// x / ||x||. Zero-norm input is an error.
Eigen::VectorXd length_normalize(const Eigen::VectorXd& x);

/// Length-normalizes every vector; labels preserved.
LabeledVectorSet length_normalize_set(const LabeledVectorSet& set);

/// Maps every vector to projection * (x - mean), optionally re-normalizing
/// afterwards; labels preserved.
LabeledVectorSet apply_transform(const LdaTransform& transform,
                                 const LabeledVectorSet& set,
                                 bool renormalize);

}  // namespace pldakit

#endif  // PLDAKIT_PREPROCESS_H_
