// tests/testing_util.h

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

// Test-only helpers: data generators, brute-force metric oracles, numeric
// integration and finite-difference checks. Everything here is independent
// of the library implementation paths it is used to verify.

#ifndef PLDAKIT_TESTS_TESTING_UTIL_H_
#define PLDAKIT_TESTS_TESTING_UTIL_H_

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pldakit/corpus.h"
#include "pldakit/metrics.h"
#include "pldakit/model.h"
#include "pldakit/rng.h"

namespace pldakit::testing {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Generators

inline Eigen::VectorXd random_vector(Rng& rng, int d) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.gaussian();
  return v;
}

inline Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  }
  return m;
}

inline Eigen::MatrixXd random_spd(Rng& rng, int d, double ridge = 0.5) {
  const Eigen::MatrixXd a = random_matrix(rng, d, d);
  Eigen::MatrixXd m = a * a.transpose() / d + ridge * Eigen::MatrixXd::Identity(d, d);
  return 0.5 * (m + m.transpose());
}

inline PldaModel random_model(Rng& rng, int d, int r) {
  PldaModel model;
  model.mean = random_vector(rng, d);
  model.subspace = random_matrix(rng, d, r);
  model.within_var = random_spd(rng, d);
  model.between_var = random_spd(rng, d);
  return model;
}

// Random labelled set with gaussian entries; speakers get sI_min..sI_max
// sessions.
inline LabeledVectorSet random_set(Rng& rng, int n_speakers, int sI_min,
                                   int sI_max, int dim) {
  LabeledVectorSet set;
  set.dim = dim;
  for (int s = 0; s < n_speakers; ++s) {
    SpeakerGroup group;
    group.speaker_id = "spk" + std::to_string(s);
    const int sessions =
        sI_min + (sI_max > sI_min ? rng.uniform_int(sI_max - sI_min + 1) : 0);
    for (int i = 0; i < sessions; ++i) {
      group.segment_ids.push_back(group.speaker_id + "-" + std::to_string(i));
      group.vectors.push_back(random_vector(rng, dim));
    }
    set.speakers.push_back(std::move(group));
  }
  return set;
}

// Builds a set from explicit per-speaker vector lists.
inline LabeledVectorSet make_set(
    const std::vector<std::vector<Eigen::VectorXd>>& groups) {
  LabeledVectorSet set;
  set.dim = static_cast<int>(groups.at(0).at(0).size());
  for (std::size_t s = 0; s < groups.size(); ++s) {
    SpeakerGroup group;
    group.speaker_id = "spk" + std::to_string(s);
    for (std::size_t i = 0; i < groups[s].size(); ++i) {
      group.segment_ids.push_back(group.speaker_id + "-" + std::to_string(i));
      group.vectors.push_back(groups[s][i]);
    }
    set.speakers.push_back(std::move(group));
  }
  return set;
}

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<int>(values.size()));
  int i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// ---------------------------------------------------------------------------
// Brute-force detection-metric oracles (O(n^2) counting, no sharing with the
// library implementation).

inline std::vector<DetPoint> oracle_det_points(
    const std::vector<double>& targets, const std::vector<double>& nontargets) {
  std::set<double> distinct(targets.begin(), targets.end());
  distinct.insert(nontargets.begin(), nontargets.end());
  std::vector<double> thresholds(distinct.begin(), distinct.end());
  thresholds.push_back(kInf);

  std::vector<DetPoint> points;
  for (double t : thresholds) {
    long miss = 0;
    for (double s : targets) {
      if (s < t) ++miss;
    }
    long fa = 0;
    for (double s : nontargets) {
      if (s >= t) ++fa;
    }
    DetPoint p;
    p.threshold = t;
    p.p_miss = static_cast<double>(miss) / static_cast<double>(targets.size());
    p.p_fa = static_cast<double>(fa) / static_cast<double>(nontargets.size());
    points.push_back(p);
  }
  return points;
}

inline double oracle_eer(const std::vector<double>& targets,
                         const std::vector<double>& nontargets) {
  const auto points = oracle_det_points(targets, nontargets);
  DetPoint prev = points.front();
  for (const auto& p : points) {
    const double diff = p.p_miss - p.p_fa;
    if (diff == 0.0) return p.p_miss;
    if (diff > 0.0) {
      const double lambda = (prev.p_fa - prev.p_miss) /
                            ((p.p_miss - prev.p_miss) - (p.p_fa - prev.p_fa));
      return prev.p_miss + lambda * (p.p_miss - prev.p_miss);
    }
    prev = p;
  }
  return 1.0;
}

inline double oracle_min_dcf(const std::vector<double>& targets,
                             const std::vector<double>& nontargets,
                             double miss_weight, double fa_weight) {
  double best = kInf;
  for (const auto& p : oracle_det_points(targets, nontargets)) {
    const double cost = miss_weight * p.p_miss + fa_weight * p.p_fa;
    if (cost < best) best = cost;
  }
  return best;
}

inline double oracle_top_s(const Eigen::MatrixXd& m,
                           const std::vector<bool>& is_blacklist) {
  std::vector<double> targets;
  std::vector<double> nontargets;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double best = -kInf;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) > best) best = m(i, j);
    }
    (is_blacklist[static_cast<std::size_t>(i)] ? targets : nontargets)
        .push_back(best);
  }
  return oracle_eer(targets, nontargets);
}

inline double oracle_top_1(const Eigen::MatrixXd& m,
                           const std::vector<bool>& is_blacklist,
                           const std::vector<int>& true_speaker) {
  std::vector<double> targets;
  std::vector<double> nontargets;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double best = -kInf;
    Eigen::Index arg = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) > best) {
        best = m(i, j);
        arg = j;
      }
    }
    if (is_blacklist[static_cast<std::size_t>(i)]) {
      targets.push_back(arg == true_speaker[static_cast<std::size_t>(i)]
                            ? best
                            : -kInf);
    } else {
      nontargets.push_back(best);
    }
  }
  return oracle_eer(targets, nontargets);
}

// Fine-grid threshold sweep with linear interpolation at the crossing;
// independent of the distinct-score sweep above.
inline double oracle_eer_grid(const std::vector<double>& targets,
                              const std::vector<double>& nontargets,
                              int steps) {
  double lo = kInf;
  double hi = -kInf;
  for (double s : targets) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  for (double s : nontargets) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  lo -= 1.0;
  hi += 1.0;
  auto rates = [&](double t) {
    long miss = 0;
    for (double s : targets) {
      if (s < t) ++miss;
    }
    long fa = 0;
    for (double s : nontargets) {
      if (s >= t) ++fa;
    }
    return std::pair<double, double>(
        static_cast<double>(miss) / static_cast<double>(targets.size()),
        static_cast<double>(fa) / static_cast<double>(nontargets.size()));
  };
  auto [pm_prev, pf_prev] = rates(lo);
  for (int i = 1; i <= steps; ++i) {
    const double t = lo + (hi - lo) * i / steps;
    auto [pm, pf] = rates(t);
    if (pm - pf == 0.0) return pm;
    if (pm - pf > 0.0) {
      const double lambda =
          (pf_prev - pm_prev) / ((pm - pm_prev) - (pf - pf_prev));
      return pm_prev + lambda * (pm - pm_prev);
    }
    pm_prev = pm;
    pf_prev = pf;
  }
  return 1.0;
}

// ---------------------------------------------------------------------------
// Numeric analysis helpers

// Composite Simpson rule; n must be even.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n) {
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) {
    sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

inline double normal_pdf(double x, double mean, double var) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / var) /
         std::sqrt(2.0 * M_PI * var);
}

// Numerically integrated two-covariance log-likelihood ratio in one
// dimension. The speaker variable y has variance subspace^2; observations
// spread around y with variance obs_same under the same-speaker hypothesis,
// and the denominator marginalizes each observation with variance obs_diff
// (obs_diff = obs_same reproduces the classical kernel; using the
// between-class variance reproduces the modified-Q kernel).
inline double oracle_llr_1d(double subspace, double obs_same, double obs_diff,
                            double x1, double x2) {
  const double ac = subspace * subspace;
  const double span = 10.0 * std::sqrt(ac) +
                      10.0 * std::sqrt(std::max(obs_same, obs_diff)) +
                      std::max(std::abs(x1), std::abs(x2));
  const int n = 8000;
  const double p_same = simpson(
      [&](double y) {
        return normal_pdf(x1, y, obs_same) * normal_pdf(x2, y, obs_same) *
               normal_pdf(y, 0.0, ac);
      },
      -span, span, n);
  auto marginal = [&](double x) {
    return simpson(
        [&](double y) {
          return normal_pdf(x, y, obs_diff) * normal_pdf(y, 0.0, ac);
        },
        -span, span, n);
  };
  return std::log(p_same) - std::log(marginal(x1)) - std::log(marginal(x2));
}

// Golden-section maximizer for smooth unimodal 1-dim functions.
inline double golden_max(const std::function<double(double)>& f, double lo,
                         double hi) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (f(c) > f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  return 0.5 * (a + b);
}

// Log joint posterior term for a speaker's factor given its vectors:
// sum_i log N(x_i; mean + subspace*h, cov) + log N(h; 0, I).
inline double factor_log_posterior(const Eigen::MatrixXd& subspace,
                                   const Eigen::MatrixXd& cov,
                                   const Eigen::VectorXd& mean,
                                   const std::vector<Eigen::VectorXd>& xs,
                                   const Eigen::VectorXd& h) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  double logdet = 0.0;
  for (int i = 0; i < cov.rows(); ++i) {
    logdet += 2.0 * std::log(llt.matrixL()(i, i));
  }
  const double d = static_cast<double>(cov.rows());
  const double log2pi = std::log(2.0 * M_PI);
  double total = 0.0;
  const Eigen::VectorXd shift = mean + subspace * h;
  for (const auto& x : xs) {
    const Eigen::VectorXd e = x - shift;
    total += -0.5 * (d * log2pi + logdet + e.dot(llt.solve(e)));
  }
  total += -0.5 * (h.size() * log2pi + h.squaredNorm());
  return total;
}

inline Eigen::VectorXd finite_diff_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& at, double step) {
  Eigen::VectorXd grad(at.size());
  for (int i = 0; i < at.size(); ++i) {
    Eigen::VectorXd hi = at;
    Eigen::VectorXd lo = at;
    hi[i] += step;
    lo[i] -= step;
    grad[i] = (f(hi) - f(lo)) / (2.0 * step);
  }
  return grad;
}

// Largest principal angle between the column spans of a and b, in degrees.
inline double max_principal_angle_deg(const Eigen::MatrixXd& a,
                                      const Eigen::MatrixXd& b) {
  const auto orthonormal = [](const Eigen::MatrixXd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return Eigen::MatrixXd(qr.householderQ() *
                           Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  };
  const Eigen::MatrixXd qa = orthonormal(a);
  const Eigen::MatrixXd qb = orthonormal(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa.transpose() * qb);
  const double smallest =
      std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  return std::acos(smallest) * 180.0 / M_PI;
}

// ---------------------------------------------------------------------------
// Filesystem and process helpers

class TempDir {
 public:
  explicit TempDir(const std::string& label) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("pldakit_" + label + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct CliResult {
  int code = -1;
  std::string output;  // stdout + stderr combined
};

// Runs the toolkit binary (PLDAKIT_BIN) with the given argument string.
inline CliResult run_cli(const std::string& binary, const std::string& args,
                         const TempDir& dir) {
  const std::string log = dir.file("cli_output.txt");
  const std::string command =
      "cd '" + dir.path().string() + "' && '" + binary + "' " + args + " > '" +
      log + "' 2>&1";
  const int status = std::system(command.c_str());
  CliResult result;
  result.output = read_file(log);
  if (WIFEXITED(status)) {
    result.code = WEXITSTATUS(status);
  }
  return result;
}

}  // namespace pldakit::testing

#endif  // PLDAKIT_TESTS_TESTING_UTIL_H_
