// core/src/preprocess.cc

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

#include "pldakit/preprocess.h"

#include <algorithm>
#include <cmath>

#include "pldakit/error.h"

namespace pldakit {

namespace {

constexpr double kRidge = 1e-6;

// Deterministic eigenvector orientation: flip so the first coordinate whose
// magnitude clears a relative threshold is positive.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-10 * scale) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

}  // namespace

ScatterStats compute_scatter(const LabeledVectorSet& set) {
  set.check_valid();
  if (set.num_speakers() < 2) {
    throw Error("scatter computation needs at least 2 speakers");
  }
  const int d = set.dim;

  ScatterStats stats;
  stats.class_means.reserve(set.speakers.size());
  for (const auto& s : set.speakers) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& v : s.vectors) mean += v;
    mean /= static_cast<double>(s.vectors.size());
    stats.class_means.push_back(std::move(mean));
  }

  stats.mean = Eigen::VectorXd::Zero(d);
  for (const auto& m : stats.class_means) stats.mean += m;
  stats.mean /= static_cast<double>(stats.class_means.size());

  stats.within = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t s = 0; s < set.speakers.size(); ++s) {
    for (const auto& v : set.speakers[s].vectors) {
      const Eigen::VectorXd diff = v - stats.class_means[s];
      stats.within.noalias() += diff * diff.transpose();
    }
  }

  stats.between = Eigen::MatrixXd::Zero(d, d);
  for (const auto& m : stats.class_means) {
    const Eigen::VectorXd diff = m - stats.mean;
    stats.between.noalias() += diff * diff.transpose();
  }

  stats.within = 0.5 * (stats.within + stats.within.transpose()).eval();
  stats.between = 0.5 * (stats.between + stats.between.transpose()).eval();
  return stats;
}

LdaTransform fit_lda(const LabeledVectorSet& set, int out_dim) {
  const ScatterStats stats = compute_scatter(set);
  const int d = set.dim;
  const int max_out = std::min(d, set.num_speakers() - 1);
  if (out_dim < 1 || out_dim > max_out) {
    throw Error("lda output dimension " + std::to_string(out_dim) +
                " out of range [1, " + std::to_string(max_out) + "]");
  }

  Eigen::MatrixXd within_reg =
      stats.within + kRidge * (stats.within.trace() / d) *
                         Eigen::MatrixXd::Identity(d, d);
  if (Eigen::LLT<Eigen::MatrixXd>(within_reg).info() != Eigen::Success) {
    throw Error("within-class scatter not positive definite after "
                "regularization");
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      stats.between, within_reg);
  if (solver.info() != Eigen::Success) {
    throw Error("generalized eigensolver failed on the scatter pencil");
  }

  // Eigenvalues come out ascending; take the trailing columns.
  LdaTransform transform;
  transform.mean = stats.mean;
  transform.projection.resize(out_dim, d);
  for (int i = 0; i < out_dim; ++i) {
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - i);
    fix_sign(v);
    transform.projection.row(i) = v.transpose();
  }
  if (!transform.projection.allFinite()) {
    throw Error("lda projection has non-finite entries");
  }
  return transform;
}

Eigen::VectorXd length_normalize(const Eigen::VectorXd& x) {
  const double norm = x.norm();
  if (norm == 0.0) throw Error("cannot length-normalize a zero vector");
  return x / norm;
}

LabeledVectorSet length_normalize_set(const LabeledVectorSet& set) {
  LabeledVectorSet out = set;
  for (auto& s : out.speakers) {
    for (auto& v : s.vectors) v = length_normalize(v);
  }
  return out;
}

LabeledVectorSet apply_transform(const LdaTransform& transform,
                                 const LabeledVectorSet& set,
                                 bool renormalize) {
  if (set.dim != transform.in_dim()) {
    throw Error("transform input dimension " +
                std::to_string(transform.in_dim()) +
                " does not match set dimension " + std::to_string(set.dim));
  }
  LabeledVectorSet out;
  out.dim = transform.out_dim();
  out.speakers.reserve(set.speakers.size());
  for (const auto& s : set.speakers) {
    SpeakerGroup group;
    group.speaker_id = s.speaker_id;
    group.segment_ids = s.segment_ids;
    group.vectors.reserve(s.vectors.size());
    for (const auto& v : s.vectors) {
      Eigen::VectorXd projected = transform.projection * (v - transform.mean);
      group.vectors.push_back(renormalize ? length_normalize(projected)
                                          : std::move(projected));
    }
    out.speakers.push_back(std::move(group));
  }
  return out;
}

}  // namespace pldakit
