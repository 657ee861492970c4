// core/src/corpus.cc

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

#include "pldakit/corpus.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "pldakit/error.h"
#include "pldakit/rng.h"
#include "pldakit/text.h"

namespace pldakit {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

double parse_double(const std::string& token, const std::string& path,
                    int row) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc() || result.ptr != last) {
    throw Error(path + ": data row " + std::to_string(row) +
                ": malformed number '" + token + "'");
  }
  return value;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

// Shared assembler for both vector formats: appends rows, tracking speaker
// order of first appearance and rejecting duplicate (speaker, segment) pairs
// and dimension mismatches.
class SetBuilder {
 public:
  explicit SetBuilder(std::string path) : path_(std::move(path)) {}

  void add_row(const std::string& speaker_id, const std::string& segment_id,
               Eigen::VectorXd vector, int row) {
    if (set_.dim == 0) {
      set_.dim = static_cast<int>(vector.size());
    } else if (vector.size() != set_.dim) {
      throw Error(path_ + ": data row " + std::to_string(row) +
                  ": dimension mismatch, expected " + std::to_string(set_.dim) +
                  " values, got " + std::to_string(vector.size()));
    }
    if (!seen_.emplace(speaker_id + "\x1f" + segment_id).second) {
      throw Error(path_ + ": data row " + std::to_string(row) +
                  ": duplicate segment '" + segment_id + "' for speaker '" +
                  speaker_id + "'");
    }
    auto it = index_.find(speaker_id);
    if (it == index_.end()) {
      it = index_.emplace(speaker_id, set_.speakers.size()).first;
      set_.speakers.push_back(SpeakerGroup{speaker_id, {}, {}});
    }
    SpeakerGroup& group = set_.speakers[it->second];
    group.segment_ids.push_back(segment_id);
    group.vectors.push_back(std::move(vector));
  }

  LabeledVectorSet take() {
    if (set_.speakers.empty()) throw Error(path_ + ": no vectors");
    return std::move(set_);
  }

 private:
  std::string path_;
  LabeledVectorSet set_;
  std::unordered_map<std::string, std::size_t> index_;
  std::set<std::string> seen_;
};

LabeledVectorSet load_vectors_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": no vectors");
  line = strip_cr(line);
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "speaker_id" ||
      header[1] != "segment_id") {
    throw Error(path + ": malformed header, expected "
                "'speaker_id,segment_id,v0,...'");
  }
  const int dim = static_cast<int>(header.size()) - 2;

  SetBuilder builder(path);
  int row = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    ++row;
    const auto fields = split_csv(line);
    if (static_cast<int>(fields.size()) != dim + 2) {
      throw Error(path + ": data row " + std::to_string(row) +
                  ": dimension mismatch, expected " + std::to_string(dim) +
                  " values, got " +
                  std::to_string(static_cast<int>(fields.size()) - 2));
    }
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) {
      v[i] = parse_double(fields[static_cast<std::size_t>(i) + 2], path, row);
    }
    builder.add_row(fields[0], fields[1], std::move(v), row);
  }
  return builder.take();
}

LabeledVectorSet load_vectors_jsonl(const std::string& path) {
  std::ifstream in = open_input(path);
  SetBuilder builder(path);
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    ++row;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(path + ": data row " + std::to_string(row) + ": " +
                  e.what());
    }
    if (!obj.is_object() || !obj.contains("speaker_id") ||
        !obj.contains("segment_id") || !obj.contains("vector") ||
        !obj["vector"].is_array()) {
      throw Error(path + ": data row " + std::to_string(row) +
                  ": expected {\"speaker_id\",\"segment_id\",\"vector\"}");
    }
    const auto& arr = obj["vector"];
    Eigen::VectorXd v(static_cast<int>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_number()) {
        throw Error(path + ": data row " + std::to_string(row) +
                    ": vector entry " + std::to_string(i) + " is not a number");
      }
      v[static_cast<int>(i)] = arr[i].get<double>();
    }
    builder.add_row(obj["speaker_id"].get<std::string>(),
                    obj["segment_id"].get<std::string>(), std::move(v), row);
  }
  return builder.take();
}

}  // namespace

int LabeledVectorSet::total_vectors() const {
  int n = 0;
  for (const auto& s : speakers) n += static_cast<int>(s.vectors.size());
  return n;
}

Eigen::VectorXd LabeledVectorSet::global_mean() const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  int n = 0;
  for (const auto& s : speakers) {
    for (const auto& v : s.vectors) {
      sum += v;
      ++n;
    }
  }
  if (n == 0) throw Error("global_mean of empty set");
  return sum / n;
}

void LabeledVectorSet::check_valid() const {
  if (dim <= 0) throw Error("vector set has non-positive dimension");
  std::set<std::string> ids;
  for (const auto& s : speakers) {
    if (!ids.insert(s.speaker_id).second) {
      throw Error("duplicate speaker id '" + s.speaker_id + "'");
    }
    if (s.vectors.empty()) {
      throw Error("speaker '" + s.speaker_id + "' has no vectors");
    }
    if (s.segment_ids.size() != s.vectors.size()) {
      throw Error("speaker '" + s.speaker_id +
                  "': segment id / vector count mismatch");
    }
    for (const auto& v : s.vectors) {
      if (v.size() != dim) {
        throw Error("speaker '" + s.speaker_id + "' has a vector of length " +
                    std::to_string(v.size()) + ", expected " +
                    std::to_string(dim));
      }
      if (!v.allFinite()) {
        throw Error("speaker '" + s.speaker_id + "' has non-finite entries");
      }
    }
  }
}

LabeledVectorSet load_vectors(const std::string& path, VectorFormat format) {
  LabeledVectorSet set = format == VectorFormat::kCsv
                             ? load_vectors_csv(path)
                             : load_vectors_jsonl(path);
  set.check_valid();
  return set;
}

void save_vectors(const LabeledVectorSet& set, const std::string& path,
                  VectorFormat format) {
  std::ofstream out = open_output(path);
  if (format == VectorFormat::kCsv) {
    out << "speaker_id,segment_id";
    for (int i = 0; i < set.dim; ++i) out << ",v" << i;
    out << "\n";
    for (const auto& s : set.speakers) {
      for (std::size_t i = 0; i < s.vectors.size(); ++i) {
        out << s.speaker_id << "," << s.segment_ids[i];
        const Eigen::VectorXd& v = s.vectors[i];
        for (int j = 0; j < set.dim; ++j) out << "," << g17(v[j]);
        out << "\n";
      }
    }
  } else {
    for (const auto& s : set.speakers) {
      for (std::size_t i = 0; i < s.vectors.size(); ++i) {
        nlohmann::ordered_json obj;
        obj["speaker_id"] = s.speaker_id;
        obj["segment_id"] = s.segment_ids[i];
        obj["vector"] = std::vector<double>(
            s.vectors[i].data(), s.vectors[i].data() + s.vectors[i].size());
        out << obj.dump() << "\n";
      }
    }
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

TrialList load_trials(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty trial file");
  if (strip_cr(line) != "model_id,segment_id,label") {
    throw Error(path + ": malformed header, expected "
                "'model_id,segment_id,label'");
  }
  TrialList trials;
  std::set<std::string> seen;
  int row = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    ++row;
    const auto fields = split_csv(line);
    if (fields.size() != 3) {
      throw Error(path + ": data row " + std::to_string(row) +
                  ": expected 3 fields, got " + std::to_string(fields.size()));
    }
    TrialLabel label;
    if (fields[2] == "target") {
      label = TrialLabel::kTarget;
    } else if (fields[2] == "nontarget") {
      label = TrialLabel::kNontarget;
    } else if (fields[2] == "unknown") {
      label = TrialLabel::kUnknown;
    } else {
      throw Error(path + ": data row " + std::to_string(row) +
                  ": unrecognized label '" + fields[2] + "'");
    }
    if (!seen.emplace(fields[0] + "\x1f" + fields[1]).second) {
      throw Error(path + ": data row " + std::to_string(row) +
                  ": duplicate trial (" + fields[0] + ", " + fields[1] + ")");
    }
    trials.entries.push_back(Trial{fields[0], fields[1], label});
  }
  return trials;
}

void save_trials(const TrialList& trials, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "model_id,segment_id,label\n";
  for (const auto& t : trials.entries) {
    const char* label = t.label == TrialLabel::kTarget      ? "target"
                        : t.label == TrialLabel::kNontarget ? "nontarget"
                                                            : "unknown";
    out << t.model_id << "," << t.segment_id << "," << label << "\n";
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

SynthResult generate_synthetic(const SynthConfig& cfg) {
  if (cfg.n_speakers <= 0 || cfg.sessions_per_speaker <= 0 || cfg.dim <= 0 ||
      cfg.rank <= 0) {
    throw Error("synthetic config: counts and dimensions must be positive");
  }
  if (cfg.rank > cfg.dim) throw Error("synthetic config: rank exceeds dim");
  if (cfg.noise_scale < 0) {
    throw Error("synthetic config: noise_scale must be non-negative");
  }
  if (cfg.clusters < 0 || cfg.clusters > cfg.n_speakers) {
    throw Error("synthetic config: clusters must lie in [0, n_speakers]");
  }
  if (cfg.clusters > 0 && cfg.cluster_spread <= 0) {
    throw Error("synthetic config: cluster_spread must be positive");
  }
  if (cfg.test_sessions < 0) {
    throw Error("synthetic config: test_sessions must be non-negative");
  }

  Rng rng(cfg.seed);
  SynthResult result;

  Eigen::MatrixXd subspace(cfg.dim, cfg.rank);
  for (int i = 0; i < cfg.dim; ++i) {
    for (int j = 0; j < cfg.rank; ++j) subspace(i, j) = rng.gaussian();
  }

  std::vector<Eigen::VectorXd> centres;
  if (cfg.clusters > 0) {
    centres.reserve(static_cast<std::size_t>(cfg.clusters));
    for (int k = 0; k < cfg.clusters; ++k) {
      Eigen::VectorXd c(cfg.rank);
      for (int i = 0; i < cfg.rank; ++i) c[i] = rng.gaussian();
      centres.push_back(std::move(c));
    }
  }

  result.data.dim = cfg.dim;
  result.heldout.dim = cfg.dim;
  result.speaker_factors.resize(cfg.rank, cfg.n_speakers);

  auto draw_session = [&](const Eigen::VectorXd& factor) {
    Eigen::VectorXd x = subspace * factor;
    for (int i = 0; i < cfg.dim; ++i) x[i] += cfg.noise_scale * rng.gaussian();
    return x;
  };

  for (int s = 0; s < cfg.n_speakers; ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "s%04d", s);

    Eigen::VectorXd factor(cfg.rank);
    for (int i = 0; i < cfg.rank; ++i) factor[i] = rng.gaussian();
    if (cfg.clusters > 0) {
      const int cluster = static_cast<int>(
          (static_cast<long long>(s) * cfg.clusters) / cfg.n_speakers);
      factor = centres[static_cast<std::size_t>(cluster)] +
               cfg.cluster_spread * factor;
    }
    result.speaker_factors.col(s) = factor;

    SpeakerGroup train_group;
    train_group.speaker_id = name;
    for (int i = 0; i < cfg.sessions_per_speaker; ++i) {
      char seg[48];
      std::snprintf(seg, sizeof(seg), "%s-t%02d", name, i);
      train_group.segment_ids.emplace_back(seg);
      train_group.vectors.push_back(draw_session(factor));
    }
    result.data.speakers.push_back(std::move(train_group));

    if (cfg.test_sessions > 0) {
      SpeakerGroup test_group;
      test_group.speaker_id = name;
      for (int i = 0; i < cfg.test_sessions; ++i) {
        char seg[48];
        std::snprintf(seg, sizeof(seg), "%s-e%02d", name, i);
        test_group.segment_ids.emplace_back(seg);
        test_group.vectors.push_back(draw_session(factor));
      }
      result.heldout.speakers.push_back(std::move(test_group));
    }
  }

  result.truth.mean = Eigen::VectorXd::Zero(cfg.dim);
  result.truth.subspace = std::move(subspace);
  result.truth.within_var = cfg.noise_scale * cfg.noise_scale *
                            Eigen::MatrixXd::Identity(cfg.dim, cfg.dim);
  result.truth.between_var = Eigen::MatrixXd::Identity(cfg.dim, cfg.dim);

  result.data.check_valid();
  return result;
}

}  // namespace pldakit
