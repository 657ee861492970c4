// core/src/plda.cc

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

#include "pldakit/plda.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "pldakit/error.h"
#include "pldakit/rng.h"

namespace pldakit {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

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

// Flattened view of a set: vectors in speaker-major, session-minor order.
struct Flat {
  std::vector<const Eigen::VectorXd*> vectors;
  std::vector<int> begin;  // per speaker; size num_speakers + 1
};

Flat flatten(const LabeledVectorSet& set) {
  Flat flat;
  flat.begin.reserve(set.speakers.size() + 1);
  flat.begin.push_back(0);
  for (const auto& s : set.speakers) {
    for (const auto& v : s.vectors) flat.vectors.push_back(&v);
    flat.begin.push_back(static_cast<int>(flat.vectors.size()));
  }
  return flat;
}

// Per-iteration factor solver: caches cov^-1 F, F^t cov^-1 F and one
// factorized bracket per distinct group size.
class FactorSolver {
 public:
  FactorSolver(const Eigen::MatrixXd& subspace, const Eigen::MatrixXd& cov,
               const char* cov_name)
      : subspace_(subspace) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw Error(std::string(cov_name) +
                  " covariance is not positive definite");
    }
    cov_inv_subspace_ = llt.solve(subspace);
    gram_ = subspace.transpose() * cov_inv_subspace_;
  }

  Eigen::VectorXd solve(int count, const Eigen::VectorXd& centered_sum) {
    auto it = brackets_.find(count);
    if (it == brackets_.end()) {
      const int r = static_cast<int>(subspace_.cols());
      Eigen::MatrixXd bracket =
          static_cast<double>(count) * gram_ +
          Eigen::MatrixXd::Identity(r, r);
      it = brackets_.emplace(count, Eigen::LLT<Eigen::MatrixXd>(bracket))
               .first;
      if (it->second.info() != Eigen::Success) {
        throw Error("factor posterior bracket is not positive definite");
      }
    }
    return it->second.solve(cov_inv_subspace_.transpose() * centered_sum);
  }

 private:
  const Eigen::MatrixXd& subspace_;
  Eigen::MatrixXd cov_inv_subspace_;
  Eigen::MatrixXd gram_;
  std::map<int, Eigen::LLT<Eigen::MatrixXd>> brackets_;
};

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd floor_eigenvalues(const Eigen::MatrixXd& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw Error("eigendecomposition failed while flooring a covariance");
  }
  if (solver.eigenvalues().minCoeff() >= floor) return m;
  // Clamp slightly above the floor so the bound survives re-measuring the
  // reconstructed matrix in floating point.
  const double safety =
      64.0 * std::numeric_limits<double>::epsilon() * m.norm();
  const Eigen::VectorXd floored = solver.eigenvalues().cwiseMax(floor + safety);
  return symmetrized(solver.eigenvectors() * floored.asDiagonal() *
                     solver.eigenvectors().transpose());
}

Eigen::MatrixXd estimate_covariance(const MomentStats& stats,
                                    const Eigen::MatrixXd& subspace,
                                    double variance_floor) {
  if (stats.count <= 0) {
    throw Error("covariance update called with empty statistics");
  }
  Eigen::MatrixXd m = stats.raw - stats.cross * subspace.transpose() -
                      subspace * stats.cross.transpose() +
                      subspace * stats.outer * subspace.transpose();
  m /= stats.count;
  return floor_eigenvalues(symmetrized(m), variance_floor);
}

// Mean joint log-likelihood of grouped vectors under
//   v ~ N(mean + subspace * factor_s, cov),  factor_s ~ N(0, I),
// with one prior term per group and the average taken over vectors.
double grouped_objective(
    const std::vector<std::vector<const Eigen::VectorXd*>>& groups,
    const std::function<const Eigen::VectorXd&(std::size_t)>& factor,
    const Eigen::VectorXd& mean, const Eigen::MatrixXd& subspace,
    const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error("objective evaluation: covariance not positive definite");
  }
  double logdet = 0.0;
  for (int i = 0; i < cov.rows(); ++i) {
    logdet += 2.0 * std::log(llt.matrixL()(i, i));
  }
  const double d = static_cast<double>(cov.rows());
  double total = 0.0;
  double count = 0.0;
  for (std::size_t s = 0; s < groups.size(); ++s) {
    const Eigen::VectorXd& f = factor(s);
    const Eigen::VectorXd shift = mean + subspace * f;
    for (const Eigen::VectorXd* v : groups[s]) {
      const Eigen::VectorXd e = *v - shift;
      total += -0.5 * (d * kLog2Pi + logdet + e.dot(llt.solve(e)));
      count += 1.0;
    }
    const double r = static_cast<double>(f.size());
    total += -0.5 * (r * kLog2Pi + f.squaredNorm());
  }
  return total / count;
}

Eigen::VectorXd estep_factor(const Eigen::MatrixXd& subspace,
                             const Eigen::MatrixXd& cov,
                             const Eigen::VectorXd& mean,
                             const std::vector<Eigen::VectorXd>& vectors,
                             const char* cov_name) {
  if (vectors.empty()) throw Error("factor estimate needs at least 1 vector");
  for (const auto& v : vectors) {
    if (v.size() != mean.size()) {
      throw Error("factor estimate: vector dimension mismatch");
    }
  }
  FactorSolver solver(subspace, cov, cov_name);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(mean.size());
  for (const auto& v : vectors) sum += v - mean;
  return solver.solve(static_cast<int>(vectors.size()), sum);
}

TrainResult train_impl(const LabeledVectorSet& set, const TrainConfig& cfg,
                       bool multi_objective) {
  set.check_valid();
  if (set.num_speakers() < 2) {
    throw Error("training needs at least 2 speakers");
  }
  if (cfg.rank < 1 || cfg.rank > set.dim) {
    throw Error("rank " + std::to_string(cfg.rank) + " out of range [1, " +
                std::to_string(set.dim) + "]");
  }
  if (cfg.iterations < 1) throw Error("iterations must be positive");
  if (cfg.variance_floor < 0) throw Error("variance_floor must be >= 0");
  if (multi_objective && !(cfg.alpha > 0)) {
    throw Error("alpha must be positive for multi-objective training");
  }

  const int d = set.dim;
  const int r = cfg.rank;
  const int n_speakers = set.num_speakers();
  const Flat flat = flatten(set);
  const int n_total = static_cast<int>(flat.vectors.size());

  const Eigen::VectorXd mean = set.global_mean();

  Eigen::MatrixXd raw_within = Eigen::MatrixXd::Zero(d, d);
  for (const Eigen::VectorXd* v : flat.vectors) {
    const Eigen::VectorXd diff = *v - mean;
    raw_within.noalias() += diff * diff.transpose();
  }
  const Eigen::MatrixXd total_cov = symmetrized(raw_within / n_total);

  // Start from scaled principal directions of the total covariance; both
  // covariances from half of it. Deterministic, scale-matched.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pca(total_cov);
  if (pca.info() != Eigen::Success) {
    throw Error("initialization eigendecomposition failed");
  }
  Eigen::MatrixXd subspace(d, r);
  for (int i = 0; i < r; ++i) {
    Eigen::VectorXd dir = pca.eigenvectors().col(d - 1 - i);
    fix_sign(dir);
    subspace.col(i) =
        dir * std::sqrt(std::max(pca.eigenvalues()[d - 1 - i], 0.0));
  }
  Eigen::MatrixXd within_var =
      floor_eigenvalues(0.5 * total_cov, cfg.variance_floor);
  Eigen::MatrixXd between_var = within_var;

  std::vector<std::vector<const Eigen::VectorXd*>> own_groups(
      static_cast<std::size_t>(n_speakers));
  std::vector<Eigen::VectorXd> own_sums(static_cast<std::size_t>(n_speakers));
  for (int s = 0; s < n_speakers; ++s) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    for (int i = flat.begin[s]; i < flat.begin[s + 1]; ++i) {
      own_groups[s].push_back(flat.vectors[i]);
      sum += *flat.vectors[i] - mean;
    }
    own_sums[s] = std::move(sum);
  }

  BetweenClassAssignment assignment;
  std::vector<std::vector<const Eigen::VectorXd*>> between_groups;
  std::vector<Eigen::VectorXd> between_sums;
  Eigen::MatrixXd raw_between;
  if (multi_objective) {
    assignment = select_between_class(set, cfg.selection, cfg.seed);
    between_groups.resize(static_cast<std::size_t>(n_speakers));
    between_sums.resize(static_cast<std::size_t>(n_speakers));
    raw_between = Eigen::MatrixXd::Zero(d, d);
    for (int s = 0; s < n_speakers; ++s) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
      for (int idx : assignment.per_speaker[s].indices) {
        const Eigen::VectorXd* v = flat.vectors[idx];
        between_groups[s].push_back(v);
        const Eigen::VectorXd diff = *v - mean;
        raw_between.noalias() += diff * diff.transpose();
        sum += diff;
      }
      between_sums[s] = std::move(sum);
    }
  }

  TrainingLog log;
  std::vector<SpeakerPosterior> posteriors(
      static_cast<std::size_t>(n_speakers));

  for (int iteration = 0; iteration < cfg.iterations; ++iteration) {
    try {
      FactorSolver within_solver(subspace, within_var, "within-class");
      std::optional<FactorSolver> between_solver;
      if (multi_objective) {
        between_solver.emplace(subspace, between_var, "between-class");
      }

      MomentStats within_stats = MomentStats::zero(d, r);
      within_stats.raw = raw_within;
      MomentStats between_stats;
      if (multi_objective) {
        between_stats = MomentStats::zero(d, r);
        between_stats.raw = raw_between;
      }

      for (int s = 0; s < n_speakers; ++s) {
        SpeakerPosterior& posterior = posteriors[s];
        const int own_count = static_cast<int>(own_groups[s].size());
        posterior.h = within_solver.solve(own_count, own_sums[s]);
        within_stats.cross.noalias() += own_sums[s] * posterior.h.transpose();
        within_stats.outer.noalias() +=
            own_count * (posterior.h * posterior.h.transpose());
        within_stats.count += own_count;

        if (multi_objective) {
          const int k_count = static_cast<int>(between_groups[s].size());
          posterior.g = between_solver->solve(k_count, between_sums[s]);
          between_stats.cross.noalias() +=
              between_sums[s] * posterior.g.transpose();
          between_stats.outer.noalias() +=
              k_count * (posterior.g * posterior.g.transpose());
          between_stats.count += k_count;
        }
      }

      MomentStats zeroed;
      const MomentStats* between_ptr = nullptr;
      if (multi_objective) {
        if (cfg.zero_between_stats) {
          zeroed = MomentStats::zero(d, r);
          zeroed.count = between_stats.count;
          between_ptr = &zeroed;
        } else {
          between_ptr = &between_stats;
        }
      }

      subspace = mstep_subspace(within_stats, between_ptr, cfg.alpha);
      auto [new_within, new_between] = mstep_covariances(
          within_stats, between_ptr, subspace, cfg.variance_floor);
      within_var = std::move(new_within);
      if (multi_objective) between_var = std::move(*new_between);

      IterationRecord record;
      record.f = grouped_objective(
          own_groups,
          [&](std::size_t s) -> const Eigen::VectorXd& {
            return posteriors[s].h;
          },
          mean, subspace, within_var);
      if (multi_objective) {
        record.g = grouped_objective(
            between_groups,
            [&](std::size_t s) -> const Eigen::VectorXd& {
              return posteriors[s].g;
            },
            mean, subspace, between_var);
        record.combined = cfg.alpha * record.f - *record.g;
      }
      log.iterations.push_back(record);

      if (cfg.record_state) {
        log.subspace_history.push_back(subspace);
        log.within_var_history.push_back(within_var);
        Eigen::MatrixXd factors(r, n_speakers);
        for (int s = 0; s < n_speakers; ++s) factors.col(s) = posteriors[s].h;
        log.factor_history.push_back(std::move(factors));
      }
    } catch (const Error& e) {
      throw Error("iteration " + std::to_string(iteration + 1) + ": " +
                  e.what());
    }
  }

  PldaModel model;
  model.mean = mean;
  model.subspace = std::move(subspace);
  model.within_var = std::move(within_var);
  if (multi_objective) {
    model.between_var = std::move(between_var);
    model.trained_alpha = cfg.alpha;
  } else {
    model.between_var = model.within_var;
    model.trained_alpha = 1.0;
  }
  return TrainResult{std::move(model), std::move(log)};
}

}  // namespace

void PldaModel::check_valid() const {
  const int d = dim();
  const int r = rank();
  if (d < 1) throw Error("model: empty mean");
  if (r < 1 || r > d) throw Error("model: rank out of range");
  if (subspace.rows() != d) throw Error("model: subspace row count != dim");
  if (within_var.rows() != d || within_var.cols() != d) {
    throw Error("model: within_var is not dim x dim");
  }
  if (between_var.rows() != d || between_var.cols() != d) {
    throw Error("model: between_var is not dim x dim");
  }
  if (!mean.allFinite() || !subspace.allFinite() || !within_var.allFinite() ||
      !between_var.allFinite() || !std::isfinite(trained_alpha)) {
    throw Error("model: non-finite entries");
  }
}

BetweenClassAssignment select_between_class(const LabeledVectorSet& set,
                                            SelectionStrategy strategy,
                                            std::uint64_t seed) {
  set.check_valid();
  if (set.num_speakers() < 2) {
    throw Error("between-class selection needs at least 2 speakers");
  }
  const Flat flat = flatten(set);
  const int n_total = static_cast<int>(flat.vectors.size());

  Rng rng(seed);
  BetweenClassAssignment assignment;
  assignment.per_speaker.reserve(set.speakers.size());

  for (int s = 0; s < set.num_speakers(); ++s) {
    const int own_begin = flat.begin[s];
    const int own_end = flat.begin[s + 1];
    const int own_count = own_end - own_begin;
    const int n_candidates = n_total - own_count;
    if (n_candidates < own_count) {
      throw Error("between-class selection: speaker '" +
                  set.speakers[s].speaker_id + "' needs " +
                  std::to_string(own_count) + " impostor vectors but only " +
                  std::to_string(n_candidates) + " are available");
    }

    SpeakerBetweenSet chosen;
    chosen.own_count = own_count;
    chosen.other_count = own_count;
    chosen.indices.reserve(static_cast<std::size_t>(2 * own_count));
    for (int i = own_begin; i < own_end; ++i) chosen.indices.push_back(i);

    std::vector<int> candidates;
    candidates.reserve(static_cast<std::size_t>(n_candidates));
    for (int i = 0; i < n_total; ++i) {
      if (i < own_begin || i >= own_end) candidates.push_back(i);
    }

    if (strategy == SelectionStrategy::kNearest) {
      Eigen::VectorXd anchor = Eigen::VectorXd::Zero(set.dim);
      for (int i = own_begin; i < own_end; ++i) anchor += *flat.vectors[i];
      anchor /= static_cast<double>(own_count);

      std::vector<std::pair<double, int>> ranked;
      ranked.reserve(candidates.size());
      for (int idx : candidates) {
        ranked.emplace_back(anchor.dot(*flat.vectors[idx]), idx);
      }
      // Descending inner product; ties by ascending flat index.
      std::sort(ranked.begin(), ranked.end(),
                [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first > b.first;
                  return a.second < b.second;
                });
      for (int i = 0; i < own_count; ++i) {
        chosen.indices.push_back(ranked[static_cast<std::size_t>(i)].second);
      }
    } else {
      // Partial Fisher-Yates over the candidate list.
      for (int i = 0; i < own_count; ++i) {
        const int j = i + rng.uniform_int(n_candidates - i);
        std::swap(candidates[static_cast<std::size_t>(i)],
                  candidates[static_cast<std::size_t>(j)]);
        chosen.indices.push_back(candidates[static_cast<std::size_t>(i)]);
      }
    }
    assignment.per_speaker.push_back(std::move(chosen));
  }
  return assignment;
}

Eigen::VectorXd estep_h(const PldaModel& model,
                        const std::vector<Eigen::VectorXd>& own_vectors) {
  return estep_factor(model.subspace, model.within_var, model.mean,
                      own_vectors, "within-class");
}

Eigen::VectorXd estep_g(const PldaModel& model,
                        const std::vector<Eigen::VectorXd>& between_vectors) {
  return estep_factor(model.subspace, model.between_var, model.mean,
                      between_vectors, "between-class");
}

MomentStats MomentStats::zero(int dim, int rank) {
  MomentStats stats;
  stats.raw = Eigen::MatrixXd::Zero(dim, dim);
  stats.cross = Eigen::MatrixXd::Zero(dim, rank);
  stats.outer = Eigen::MatrixXd::Zero(rank, rank);
  stats.count = 0.0;
  return stats;
}

void MomentStats::add_raw(const Eigen::VectorXd& v,
                          const Eigen::VectorXd& mean) {
  const Eigen::VectorXd diff = v - mean;
  raw.noalias() += diff * diff.transpose();
}

void MomentStats::add_speaker(
    const std::vector<const Eigen::VectorXd*>& vectors,
    const Eigen::VectorXd& mean, const Eigen::VectorXd& factor) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(mean.size());
  for (const Eigen::VectorXd* v : vectors) sum += *v - mean;
  cross.noalias() += sum * factor.transpose();
  outer.noalias() +=
      static_cast<double>(vectors.size()) * (factor * factor.transpose());
  count += static_cast<double>(vectors.size());
}

Eigen::MatrixXd mstep_subspace(const MomentStats& within,
                               const MomentStats* between, double alpha) {
  if (within.count <= 0) throw Error("subspace update: empty statistics");
  const double within_weight = between ? alpha : 1.0;

  Eigen::MatrixXd numerator = (within_weight / within.count) * within.cross;
  Eigen::MatrixXd bracket = (within_weight / within.count) * within.outer;
  if (between) {
    if (between->count <= 0) {
      throw Error("subspace update: empty between-class statistics");
    }
    numerator -= between->cross / between->count;
    bracket -= between->outer / between->count;
  }

  // The bracket is symmetric; solve through its eigendecomposition.
  // A positive-semidefinite rank deficiency (unidentifiable subspace
  // directions, e.g. fewer speakers than the rank) degrades to the
  // minimum-norm solution; a singular bracket with negative curvature is
  // surfaced as an error.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(bracket);
  if (solver.info() != Eigen::Success) {
    throw Error("subspace update bracket eigendecomposition failed");
  }
  const Eigen::VectorXd& values = solver.eigenvalues();
  const double scale = values.cwiseAbs().maxCoeff();
  const double tol =
      bracket.rows() * std::numeric_limits<double>::epsilon() * scale;
  const bool rank_deficient = (values.cwiseAbs().array() <= tol).any();
  if (scale == 0.0 || (rank_deficient && values.minCoeff() < -tol)) {
    throw Error("subspace update bracket is singular; reduce the rank or "
                "increase alpha");
  }
  Eigen::VectorXd inverse_values(values.size());
  for (int i = 0; i < values.size(); ++i) {
    inverse_values[i] = std::abs(values[i]) > tol ? 1.0 / values[i] : 0.0;
  }
  return numerator * (solver.eigenvectors() * inverse_values.asDiagonal() *
                      solver.eigenvectors().transpose());
}

std::pair<Eigen::MatrixXd, std::optional<Eigen::MatrixXd>> mstep_covariances(
    const MomentStats& within, const MomentStats* between,
    const Eigen::MatrixXd& subspace, double variance_floor) {
  Eigen::MatrixXd within_var =
      estimate_covariance(within, subspace, variance_floor);
  std::optional<Eigen::MatrixXd> between_var;
  if (between) {
    between_var = estimate_covariance(*between, subspace, variance_floor);
  }
  return {std::move(within_var), std::move(between_var)};
}

TrainResult train_so(const LabeledVectorSet& set, const TrainConfig& cfg) {
  return train_impl(set, cfg, /*multi_objective=*/false);
}

TrainResult train_mo(const LabeledVectorSet& set, const TrainConfig& cfg) {
  return train_impl(set, cfg, /*multi_objective=*/true);
}

}  // namespace pldakit
