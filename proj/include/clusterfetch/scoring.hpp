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

#ifndef CLUSTERFETCH_SCORING_HPP_
#define CLUSTERFETCH_SCORING_HPP_

// Offline half of the private-scoring baseline: one quantized embedding
// matrix per cluster, padded to a common row capacity.

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "clusterfetch/corpus.hpp"
#include "clusterfetch/kmeans.hpp"
#include "clusterfetch/lwe.hpp"

namespace clusterfetch {

inline constexpr std::uint64_t kPaddingRow = std::numeric_limits<std::uint64_t>::max();

using Int8Matrix = Matrix<std::int8_t>;

// Quantized query encoded as centered residues mod p.
std::vector<std::uint64_t> QuantizeEmbedding(std::span<const float> v, float maxabs,
                                             std::uint64_t plain_mod = kScoringPlainMod);

struct ScoreDatabase {
  std::uint32_t capacity = 0;
  float maxabs = 1.0f;
  // Per cluster, row -> doc_id (kPaddingRow past the fill).
  std::vector<std::vector<std::uint64_t>> row_doc_ids;
  // Per cluster, capacity x d quantized embeddings; padding rows are zero.
  std::vector<Int8Matrix> matrices;

  bool operator==(const ScoreDatabase& o) const;
};

ScoreDatabase BuildEmbeddingMatrices(const ClusterModel& model, const RowMatrixXf& vectors,
                                     std::span<const std::uint64_t> doc_ids, float maxabs);

struct ScoredDoc {
  std::uint64_t doc_id = 0;
  std::int64_t score = 0;

  bool operator==(const ScoredDoc&) const = default;
};

// Top-K ids by descending score, ascending doc_id on ties; padding ids are
// skipped.
std::vector<std::uint64_t> SelectTopKIds(std::span<const ScoredDoc> scores, std::size_t k);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_SCORING_HPP_
