// pldakit/model.h

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

#ifndef PLDAKIT_MODEL_H_
#define PLDAKIT_MODEL_H_

#include <Eigen/Dense>

namespace pldakit {

/// Simplified Gaussian PLDA parameters.
///
/// The generative picture: an observation of speaker s is
///   x = mean + subspace * h_s + noise,
/// with h_s drawn from a standard normal prior, noise from
/// N(0, within_var), and a second full covariance between_var describing
/// the spread of vectors around a speaker's between-class factor.
/// Single-objective training leaves between_var equal to within_var.
struct PldaModel {
  Eigen::VectorXd mean;         // global mean, length d
  Eigen::MatrixXd subspace;     // speaker space, d x r
  Eigen::MatrixXd within_var;   // d x d
  Eigen::MatrixXd between_var;  // d x d
  double trained_alpha = 1.0;   // balance factor used at training time

  int dim() const { return static_cast<int>(mean.size()); }
  int rank() const { return static_cast<int>(subspace.cols()); }

  /// Throws Error on inconsistent shapes or non-finite entries.
  void check_valid() const;
};

}  // namespace pldakit

#endif  // PLDAKIT_MODEL_H_
