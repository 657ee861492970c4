// tests/test_corpus.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pldakit/corpus.h"
#include "pldakit/error.h"
#include "testing_util.h"

using namespace pldakit;
using namespace pldakit::testing;

namespace {

bool sets_equal(const LabeledVectorSet& a, const LabeledVectorSet& b) {
  if (a.dim != b.dim || a.speakers.size() != b.speakers.size()) return false;
  for (std::size_t s = 0; s < a.speakers.size(); ++s) {
    const auto& ga = a.speakers[s];
    const auto& gb = b.speakers[s];
    if (ga.speaker_id != gb.speaker_id) return false;
    if (ga.segment_ids != gb.segment_ids) return false;
    if (ga.vectors.size() != gb.vectors.size()) return false;
    for (std::size_t i = 0; i < ga.vectors.size(); ++i) {
      if (!(ga.vectors[i].array() == gb.vectors[i].array()).all()) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("csv load: two rows, one speaker") {
  TempDir dir("corpus_csv");
  const std::string path = dir.file("v.csv");
  write_file(path,
             "speaker_id,segment_id,v0,v1,v2\n"
             "a,a-1,1,2,3\n"
             "a,a-2,4,5,6\n");
  const LabeledVectorSet set = load_vectors(path, VectorFormat::kCsv);
  CHECK(set.dim == 3);
  REQUIRE(set.num_speakers() == 1);
  REQUIRE(set.speakers[0].vectors.size() == 2);
  CHECK(set.speakers[0].vectors[0] == vec({1, 2, 3}));
  CHECK(set.speakers[0].vectors[1] == vec({4, 5, 6}));
  CHECK(set.speakers[0].segment_ids[1] == "a-2");
}

TEST_CASE("csv load: dimension mismatch names the row") {
  TempDir dir("corpus_dim");
  const std::string path = dir.file("v.csv");
  write_file(path,
             "speaker_id,segment_id,v0,v1,v2\n"
             "a,a-1,1,2,3\n"
             "a,a-2,1,2,3,4\n");
  CHECK_THROWS_WITH_AS(load_vectors(path, VectorFormat::kCsv),
                       doctest::Contains("row 2"), Error);
  CHECK_THROWS_WITH_AS(load_vectors(path, VectorFormat::kCsv),
                       doctest::Contains("dimension mismatch"), Error);
}

TEST_CASE("csv load: empty and header-only files") {
  TempDir dir("corpus_empty");
  const std::string empty = dir.file("empty.csv");
  write_file(empty, "");
  CHECK_THROWS_WITH_AS(load_vectors(empty, VectorFormat::kCsv),
                       doctest::Contains("no vectors"), Error);
  const std::string header_only = dir.file("h.csv");
  write_file(header_only, "speaker_id,segment_id,v0\n");
  CHECK_THROWS_WITH_AS(load_vectors(header_only, VectorFormat::kCsv),
                       doctest::Contains("no vectors"), Error);
}

TEST_CASE("csv load: duplicate segment and malformed numbers") {
  TempDir dir("corpus_dup");
  const std::string dup = dir.file("dup.csv");
  write_file(dup,
             "speaker_id,segment_id,v0\n"
             "a,x,1\n"
             "a,x,2\n");
  CHECK_THROWS_WITH_AS(load_vectors(dup, VectorFormat::kCsv),
                       doctest::Contains("duplicate"), Error);

  const std::string bad = dir.file("bad.csv");
  write_file(bad,
             "speaker_id,segment_id,v0\n"
             "a,x,oops\n");
  CHECK_THROWS_WITH_AS(load_vectors(bad, VectorFormat::kCsv),
                       doctest::Contains("oops"), Error);
}

TEST_CASE("jsonl load and malformed line reporting") {
  TempDir dir("corpus_jsonl");
  const std::string path = dir.file("v.jsonl");
  write_file(path,
             "{\"speaker_id\":\"a\",\"segment_id\":\"a-1\",\"vector\":[1,2]}\n"
             "{\"speaker_id\":\"b\",\"segment_id\":\"b-1\",\"vector\":[3,4]}\n");
  const LabeledVectorSet set = load_vectors(path, VectorFormat::kJsonl);
  CHECK(set.dim == 2);
  CHECK(set.num_speakers() == 2);
  CHECK(set.speakers[1].vectors[0] == vec({3, 4}));

  const std::string bad = dir.file("bad.jsonl");
  write_file(bad, "{\"speaker_id\":\"a\"\n");
  CHECK_THROWS_WITH_AS(load_vectors(bad, VectorFormat::kJsonl),
                       doctest::Contains("row 1"), Error);
}

TEST_CASE("vector sets round-trip exactly through both formats") {
  Rng rng(11);
  for (int round = 0; round < 10; ++round) {
    const LabeledVectorSet set =
        random_set(rng, 2 + rng.uniform_int(5), 1, 4, 1 + rng.uniform_int(6));
    TempDir dir("corpus_rt");
    for (VectorFormat format : {VectorFormat::kCsv, VectorFormat::kJsonl}) {
      const std::string path =
          dir.file(format == VectorFormat::kCsv ? "v.csv" : "v.jsonl");
      save_vectors(set, path, format);
      CHECK(sets_equal(set, load_vectors(path, format)));
    }
  }
}

TEST_CASE("trial list: load, duplicates, labels") {
  TempDir dir("trials");
  const std::string path = dir.file("t.csv");
  write_file(path,
             "model_id,segment_id,label\n"
             "m1,t1,target\n");
  const TrialList trials = load_trials(path);
  REQUIRE(trials.entries.size() == 1);
  CHECK(trials.entries[0].label == TrialLabel::kTarget);

  const std::string dup = dir.file("dup.csv");
  write_file(dup,
             "model_id,segment_id,label\n"
             "m1,t1,target\n"
             "m1,t1,target\n");
  CHECK_THROWS_WITH_AS(load_trials(dup), doctest::Contains("duplicate"),
                       Error);

  const std::string bad = dir.file("bad.csv");
  write_file(bad,
             "model_id,segment_id,label\n"
             "m1,t1,maybe\n");
  CHECK_THROWS_WITH_AS(load_trials(bad), doctest::Contains("maybe"), Error);
}

TEST_CASE("trial list round-trips") {
  TrialList trials;
  trials.entries.push_back(Trial{"m1", "t1", TrialLabel::kTarget});
  trials.entries.push_back(Trial{"m1", "t2", TrialLabel::kNontarget});
  trials.entries.push_back(Trial{"m2", "t1", TrialLabel::kUnknown});
  TempDir dir("trials_rt");
  const std::string path = dir.file("t.csv");
  save_trials(trials, path);
  const TrialList loaded = load_trials(path);
  REQUIRE(loaded.entries.size() == trials.entries.size());
  for (std::size_t i = 0; i < trials.entries.size(); ++i) {
    CHECK(loaded.entries[i].model_id == trials.entries[i].model_id);
    CHECK(loaded.entries[i].segment_id == trials.entries[i].segment_id);
    CHECK(loaded.entries[i].label == trials.entries[i].label);
  }
}

TEST_CASE("synthetic: zero noise collapses a speaker onto one point") {
  SynthConfig cfg;
  cfg.n_speakers = 1;
  cfg.sessions_per_speaker = 2;
  cfg.dim = 4;
  cfg.rank = 1;
  cfg.noise_scale = 0.0;
  cfg.seed = 7;
  const SynthResult result = generate_synthetic(cfg);
  REQUIRE(result.data.speakers[0].vectors.size() == 2);
  CHECK(result.data.speakers[0].vectors[0] ==
        result.data.speakers[0].vectors[1]);
}

TEST_CASE("synthetic: deterministic in the seed") {
  SynthConfig cfg;
  cfg.n_speakers = 6;
  cfg.sessions_per_speaker = 3;
  cfg.dim = 5;
  cfg.rank = 2;
  cfg.noise_scale = 0.7;
  cfg.seed = 7;
  cfg.test_sessions = 2;
  const SynthResult a = generate_synthetic(cfg);
  const SynthResult b = generate_synthetic(cfg);
  CHECK(sets_equal(a.data, b.data));
  CHECK(sets_equal(a.heldout, b.heldout));
  CHECK((a.truth.subspace.array() == b.truth.subspace.array()).all());
  CHECK((a.speaker_factors.array() == b.speaker_factors.array()).all());

  cfg.seed = 8;
  const SynthResult c = generate_synthetic(cfg);
  CHECK_FALSE(sets_equal(a.data, c.data));
}

TEST_CASE("synthetic: residual covariance matches the noise scale") {
  SynthConfig cfg;
  cfg.n_speakers = 200;
  cfg.sessions_per_speaker = 5;
  cfg.dim = 50;
  cfg.rank = 10;
  cfg.noise_scale = 1.0;
  cfg.seed = 1;
  const SynthResult result = generate_synthetic(cfg);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(cfg.dim, cfg.dim);
  int n = 0;
  for (int s = 0; s < cfg.n_speakers; ++s) {
    const Eigen::VectorXd speaker_mean =
        result.truth.subspace * result.speaker_factors.col(s);
    for (const auto& v : result.data.speakers[s].vectors) {
      const Eigen::VectorXd residual = v - speaker_mean;
      cov.noalias() += residual * residual.transpose();
      ++n;
    }
  }
  cov /= n;
  const Eigen::MatrixXd deviation =
      cov - Eigen::MatrixXd::Identity(cfg.dim, cfg.dim);
  CHECK(deviation.cwiseAbs().maxCoeff() < 0.15);
}

TEST_CASE("synthetic: invariants, clusters and held-out sessions") {
  SynthConfig cfg;
  cfg.n_speakers = 20;
  cfg.sessions_per_speaker = 3;
  cfg.dim = 8;
  cfg.rank = 3;
  cfg.seed = 3;
  cfg.clusters = 4;
  cfg.cluster_spread = 0.2;
  cfg.test_sessions = 2;
  const SynthResult result = generate_synthetic(cfg);
  result.data.check_valid();
  result.heldout.check_valid();
  CHECK(result.data.total_vectors() == 60);
  CHECK(result.heldout.total_vectors() == 40);
  CHECK(result.speaker_factors.cols() == 20);

  // Same-cluster speaker factors sit closer together than the average
  // cross-cluster pair.
  double within = 0.0;
  double across = 0.0;
  int n_within = 0;
  int n_across = 0;
  for (int a = 0; a < 20; ++a) {
    for (int b = a + 1; b < 20; ++b) {
      const double dist =
          (result.speaker_factors.col(a) - result.speaker_factors.col(b))
              .norm();
      if (a / 5 == b / 5) {
        within += dist;
        ++n_within;
      } else {
        across += dist;
        ++n_across;
      }
    }
  }
  CHECK(within / n_within < across / n_across);
}

TEST_CASE("synthetic: config validation") {
  SynthConfig cfg;
  cfg.n_speakers = 2;
  cfg.sessions_per_speaker = 2;
  cfg.dim = 3;
  cfg.rank = 5;  // exceeds dim
  CHECK_THROWS_AS(generate_synthetic(cfg), Error);
  cfg.rank = 2;
  cfg.noise_scale = -1.0;
  CHECK_THROWS_AS(generate_synthetic(cfg), Error);
}

TEST_CASE("declared generator: mt19937_64 reference stream") {
  // The toolkit's seeded determinism rests on the standard-mandated
  // mt19937_64 sequence; pin the canonical 10000th draw.
  std::mt19937_64 engine;  // default seed 5489
  std::uint64_t value = 0;
  for (int i = 0; i < 10000; ++i) value = engine();
  CHECK(value == 9981545732273789042ULL);
}
