// benchmarks/bench_backend.cc

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

#include <benchmark/benchmark.h>

#include <vector>

#include "pldakit/corpus.h"
#include "pldakit/metrics.h"
#include "pldakit/plda.h"
#include "pldakit/rng.h"
#include "pldakit/scoring.h"

namespace {

using namespace pldakit;

SynthResult benchmark_data(int speakers, int sessions, int dim, int rank) {
  SynthConfig cfg;
  cfg.n_speakers = speakers;
  cfg.sessions_per_speaker = sessions;
  cfg.dim = dim;
  cfg.rank = rank;
  cfg.noise_scale = 1.0;
  cfg.seed = 1;
  return generate_synthetic(cfg);
}

PldaModel synthetic_model(int dim, int rank) {
  Rng rng(2);
  PldaModel model;
  model.mean = Eigen::VectorXd::Zero(dim);
  model.subspace.resize(dim, rank);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < rank; ++j) model.subspace(i, j) = rng.gaussian();
  }
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = rng.gaussian();
  }
  model.within_var =
      a * a.transpose() / dim + Eigen::MatrixXd::Identity(dim, dim);
  model.between_var = 0.5 * model.within_var +
                      0.5 * Eigen::MatrixXd::Identity(dim, dim);
  return model;
}

void BM_ScorePair(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const PldaModel model = synthetic_model(dim, std::max(1, dim / 10));
  const ScoringKernel kernel = build_kernel(model, KernelMode::kBetweenQ);
  Rng rng(3);
  Eigen::VectorXd x1(dim), x2(dim);
  for (int i = 0; i < dim; ++i) {
    x1[i] = rng.gaussian();
    x2[i] = rng.gaussian();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_pair(kernel, x1, x2));
  }
}
BENCHMARK(BM_ScorePair)->Arg(50)->Arg(150)->Arg(300);

void BM_TrainIterationSO(benchmark::State& state) {
  const int speakers = static_cast<int>(state.range(0));
  const SynthResult data = benchmark_data(speakers, 5, 50, 10);
  TrainConfig cfg;
  cfg.rank = 10;
  cfg.iterations = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_so(data.data, cfg));
  }
}
BENCHMARK(BM_TrainIterationSO)->Arg(100)->Arg(200);

void BM_TrainIterationMO(benchmark::State& state) {
  const int speakers = static_cast<int>(state.range(0));
  const SynthResult data = benchmark_data(speakers, 5, 50, 10);
  TrainConfig cfg;
  cfg.rank = 10;
  cfg.iterations = 1;
  cfg.alpha = 1.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_mo(data.data, cfg));
  }
}
BENCHMARK(BM_TrainIterationMO)->Arg(100)->Arg(200);

void BM_Eer(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(7);
  std::vector<double> targets, nontargets;
  for (int i = 0; i < n; ++i) {
    targets.push_back(rng.gaussian() + 1.0);
    nontargets.push_back(rng.gaussian());
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(eer_from(targets, nontargets));
  }
}
BENCHMARK(BM_Eer)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
