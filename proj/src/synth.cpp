// Copyright 2026 The clusterfetch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "clusterfetch/synth.hpp"

#include <cmath>
#include <iterator>
#include <random>
#include <string>
#include <string_view>

#include "clusterfetch/error.hpp"

namespace clusterfetch {
namespace {

void Normalize(std::vector<float>& v) {
  double n = 0;
  for (float x : v) n += static_cast<double>(x) * x;
  if (n == 0) return;
  const double inv = 1.0 / std::sqrt(n);
  for (float& x : v) x = static_cast<float>(x * inv);
}

}  // namespace

std::string FillerText(std::uint64_t doc_id, std::size_t len) {
  static constexpr std::string_view kWords[] = {
      "alpha ", "bravo ", "delta ", "echo ", "kilo ", "lima ", "oscar ", "tango ", "zulu "};
  std::string text = "doc " + std::to_string(doc_id) + ": ";
  std::uint64_t x = doc_id * 0x9E3779B97F4A7C15ull + 1;
  while (text.size() < len) {
    x ^= x >> 33;
    x *= 0xFF51AFD7ED558CCDull;
    x ^= x >> 29;
    text += kWords[x % std::size(kWords)];
  }
  text.resize(len);
  return text;
}

SyntheticCorpus GenMixtureCorpus(const RowMatrixXf& centers, const SynthOptions& options) {
  const auto n_blobs = static_cast<std::size_t>(centers.rows());
  const auto dim = static_cast<std::size_t>(centers.cols());
  if (n_blobs == 0 || dim == 0) throw Error(ErrorCode::kInvalidConfig, "need >= 1 blob and dim >= 1");
  if (n_blobs > options.n_docs) {
    throw Error(ErrorCode::kInvalidConfig, "n_blobs = " + std::to_string(n_blobs) +
                                               " exceeds n_docs = " +
                                               std::to_string(options.n_docs));
  }
  if (!(options.blob_std >= 0) || !std::isfinite(options.blob_std)) {
    throw Error(ErrorCode::kInvalidConfig, "blob_std must be finite and >= 0");
  }
  SyntheticCorpus out;
  out.centers = centers;
  NormalizeRows(out.centers);
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n_blobs - 1));
  std::normal_distribution<double> noise(0.0, 1.0);
  out.records.reserve(options.n_docs);
  out.labels.reserve(options.n_docs);
  for (std::size_t i = 0; i < options.n_docs; ++i) {
    const std::uint32_t label = pick(rng);
    std::vector<float> v(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const double e = options.blob_std == 0 ? 0.0 : options.blob_std * noise(rng);
      v[j] = static_cast<float>(out.centers(label, static_cast<Eigen::Index>(j)) + e);
    }
    Normalize(v);
    out.labels.push_back(label);
    out.records.push_back({i, std::move(v), FillerText(i, options.text_len)});
  }
  return out;
}

SyntheticCorpus GenSyntheticCorpus(const SynthOptions& options) {
  if (options.n_blobs == 0 || options.dim == 0) {
    throw Error(ErrorCode::kInvalidConfig, "need n_blobs >= 1 and dim >= 1");
  }
  std::mt19937_64 rng(options.seed ^ 0xC3A5C85C97CB3127ull);
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrixXf centers(static_cast<Eigen::Index>(options.n_blobs),
                      static_cast<Eigen::Index>(options.dim));
  for (Eigen::Index i = 0; i < centers.size(); ++i) {
    centers.data()[i] = static_cast<float>(normal(rng));
  }
  return GenMixtureCorpus(centers, options);
}

std::vector<std::vector<float>> PerturbedQueries(const std::vector<EmbeddingRecord>& corpus,
                                                 std::size_t count, double noise,
                                                 std::uint64_t seed) {
  if (corpus.empty()) throw Error(ErrorCode::kInvalidConfig, "empty corpus");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<float>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<float> q = corpus[pick(rng)].embedding;
    for (float& x : q) x = static_cast<float>(x + noise * normal(rng));
    Normalize(q);
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace clusterfetch
