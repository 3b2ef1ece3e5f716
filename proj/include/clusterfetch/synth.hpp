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

#ifndef CLUSTERFETCH_SYNTH_HPP_
#define CLUSTERFETCH_SYNTH_HPP_

// Seeded Gaussian-mixture corpora and perturbed queries.

#include <cstdint>
#include <vector>

#include "clusterfetch/corpus.hpp"

namespace clusterfetch {

struct SynthOptions {
  std::size_t n_docs = 1000;
  std::size_t dim = 16;
  std::size_t n_blobs = 20;
  double blob_std = 0.25;
  std::uint64_t seed = 1;
  std::size_t text_len = 64;
};

struct SyntheticCorpus {
  std::vector<EmbeddingRecord> records;  // doc_id = position
  std::vector<std::uint32_t> labels;     // generating blob per doc
  RowMatrixXf centers;                   // n_blobs x dim, unit rows
};

// Unit-norm random blob centers, uniform blob labels, per-coordinate
// Gaussian noise of std `blob_std`, rows L2-normalized. Throws
// kInvalidConfig.
SyntheticCorpus GenSyntheticCorpus(const SynthOptions& options);

// Same with caller-chosen centers (normalized here); options.n_blobs and
// options.dim are taken from `centers`.
SyntheticCorpus GenMixtureCorpus(const RowMatrixXf& centers, const SynthOptions& options);

// Deterministic filler text of `len` bytes keyed by doc_id.
std::string FillerText(std::uint64_t doc_id, std::size_t len);

// `count` queries: a uniformly drawn corpus embedding plus Gaussian noise of
// std `noise`, renormalized.
std::vector<std::vector<float>> PerturbedQueries(const std::vector<EmbeddingRecord>& corpus,
                                                 std::size_t count, double noise,
                                                 std::uint64_t seed);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_SYNTH_HPP_
