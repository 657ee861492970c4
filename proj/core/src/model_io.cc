// core/src/model_io.cc

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

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include "pldakit/error.h"
#include "pldakit/plda.h"
#include "pldakit/text.h"

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

namespace pldakit {

namespace {

constexpr const char* kMagic = "pldakit-model";
constexpr const char* kSeparator = "---";

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    hash ^= data[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

void append_matrix(std::vector<double>& buffer, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) buffer.push_back(m(i, j));
  }
}

void append_vector(std::vector<double>& buffer, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) buffer.push_back(v[i]);
}

class PayloadReader {
 public:
  PayloadReader(const double* data, std::size_t count)
      : data_(data), count_(count) {}

  Eigen::VectorXd take_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = next();
    return v;
  }

  Eigen::MatrixXd take_matrix(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) m(i, j) = next();
    }
    return m;
  }

 private:
  double next() {
    if (pos_ >= count_) throw Error("model payload exhausted early");
    return data_[pos_++];
  }

  const double* data_;
  std::size_t count_;
  std::size_t pos_ = 0;
};

long parse_int(const std::string& value, const char* key) {
  long out = 0;
  const auto result =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (result.ec != std::errc() || result.ptr != value.data() + value.size()) {
    throw Error(std::string("model manifest: malformed integer for '") + key +
                "'");
  }
  return out;
}

}  // namespace

void save_model(const PldaModel& model, const LdaTransform* lda,
                const std::string& path) {
  model.check_valid();
  const int d = model.dim();
  const int r = model.rank();

  std::vector<double> payload;
  payload.reserve(static_cast<std::size_t>(d) * (1 + r + 2 * d));
  append_vector(payload, model.mean);
  append_matrix(payload, model.subspace);
  append_matrix(payload, model.within_var);
  append_matrix(payload, model.between_var);
  if (lda != nullptr) {
    append_vector(payload, lda->mean);
    append_matrix(payload, lda->projection);
  }

  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  const std::size_t n_bytes = payload.size() * sizeof(double);
  const std::uint64_t checksum = fnv1a64(bytes, n_bytes);
  char checksum_hex[17];
  std::snprintf(checksum_hex, sizeof(checksum_hex), "%016llx",
                static_cast<unsigned long long>(checksum));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << kMagic << "\n";
  out << "format_version: 1\n";
  out << "d: " << d << "\n";
  out << "r: " << r << "\n";
  out << "alpha: " << g17(model.trained_alpha) << "\n";
  out << "has_lda: " << (lda != nullptr ? 1 : 0) << "\n";
  if (lda != nullptr) {
    out << "lda_in: " << lda->in_dim() << "\n";
    out << "lda_out: " << lda->out_dim() << "\n";
  }
  out << "checksum: " << checksum_hex << "\n";
  out << kSeparator << "\n";
  out.write(reinterpret_cast<const char*>(bytes),
            static_cast<std::streamsize>(n_bytes));
  if (!out) throw Error("failed writing '" + path + "'");
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw Error("'" + path + "' is not a pldakit model file");
  }

  std::map<std::string, std::string> manifest;
  while (std::getline(in, line)) {
    if (line == kSeparator) break;
    const std::size_t colon = line.find(": ");
    if (colon == std::string::npos) {
      throw Error(path + ": malformed manifest line '" + line + "'");
    }
    manifest[line.substr(0, colon)] = line.substr(colon + 2);
  }
  if (line != kSeparator) {
    throw Error(path + ": manifest separator not found");
  }

  auto require = [&](const char* key) -> const std::string& {
    const auto it = manifest.find(key);
    if (it == manifest.end()) {
      throw Error(path + ": manifest is missing '" + std::string(key) + "'");
    }
    return it->second;
  };

  const long version = parse_int(require("format_version"), "format_version");
  if (version != 1) {
    throw Error(path + ": unsupported model format version " +
                std::to_string(version));
  }
  const long d = parse_int(require("d"), "d");
  const long r = parse_int(require("r"), "r");
  const bool has_lda = parse_int(require("has_lda"), "has_lda") != 0;
  long lda_in = 0;
  long lda_out = 0;
  if (has_lda) {
    lda_in = parse_int(require("lda_in"), "lda_in");
    lda_out = parse_int(require("lda_out"), "lda_out");
  }
  if (d < 1 || r < 1 || r > d || (has_lda && (lda_in < 1 || lda_out < 1))) {
    throw Error(path + ": manifest dimensions out of range");
  }
  const std::string& checksum_hex = require("checksum");

  std::size_t n_doubles =
      static_cast<std::size_t>(d) * (1 + r + 2 * d);
  if (has_lda) {
    n_doubles += static_cast<std::size_t>(lda_in) * (1 + lda_out);
  }
  std::vector<double> payload(n_doubles);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(n_doubles * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != n_doubles * sizeof(double)) {
    throw Error(path + ": model file corrupt: payload truncated, checksum "
                "cannot be verified");
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw Error(path + ": model file corrupt: trailing bytes after payload");
  }

  const std::uint64_t checksum =
      fnv1a64(reinterpret_cast<const unsigned char*>(payload.data()),
              n_doubles * sizeof(double));
  char expected_hex[17];
  std::snprintf(expected_hex, sizeof(expected_hex), "%016llx",
                static_cast<unsigned long long>(checksum));
  if (checksum_hex != expected_hex) {
    throw Error(path + ": model file corrupt: checksum mismatch");
  }

  PayloadReader reader(payload.data(), payload.size());
  LoadedModel loaded;
  loaded.model.mean = reader.take_vector(static_cast<int>(d));
  loaded.model.subspace =
      reader.take_matrix(static_cast<int>(d), static_cast<int>(r));
  loaded.model.within_var =
      reader.take_matrix(static_cast<int>(d), static_cast<int>(d));
  loaded.model.between_var =
      reader.take_matrix(static_cast<int>(d), static_cast<int>(d));
  {
    double alpha = 0.0;
    const std::string& text = require("alpha");
    char* end = nullptr;
    alpha = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) {
      throw Error(path + ": manifest: malformed 'alpha'");
    }
    loaded.model.trained_alpha = alpha;
  }
  if (has_lda) {
    LdaTransform lda;
    lda.mean = reader.take_vector(static_cast<int>(lda_in));
    lda.projection = reader.take_matrix(static_cast<int>(lda_out),
                                        static_cast<int>(lda_in));
    loaded.lda = std::move(lda);
  }
  loaded.model.check_valid();
  return loaded;
}

}  // namespace pldakit
