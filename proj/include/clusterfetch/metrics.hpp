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

#ifndef CLUSTERFETCH_METRICS_HPP_
#define CLUSTERFETCH_METRICS_HPP_

// Ground truth and retrieval quality metrics with binary relevance.

#include <cstdint>
#include <span>
#include <vector>

#include "clusterfetch/corpus.hpp"

namespace clusterfetch {

// Exhaustive cosine scan: the `r` best ids, descending, ascending doc_id on
// ties. Throws kInvalidArgument when r exceeds the corpus size.
std::vector<std::uint64_t> ExactTopK(std::span<const float> query,
                                     std::span<const EmbeddingRecord> corpus, std::size_t r);
// Same over unit-norm rows `vectors` (dot product) with parallel `doc_ids`.
std::vector<std::uint64_t> ExactTopK(std::span<const float> query, const RowMatrixXf& vectors,
                                     std::span<const std::uint64_t> doc_ids, std::size_t r);

// sum_{i<=k} rel_i / log2(i + 1) over the ideal ordering's; 0 when nothing
// is relevant.
double NdcgAtK(std::span<const std::uint64_t> ranked, std::span<const std::uint64_t> relevant,
               std::size_t k);

struct PrecisionRecall {
  double precision = 0;
  double recall = 0;
};

// precision = hits / k, recall = hits / |relevant| (0 when nothing is
// relevant), hits counted in the first k ranked ids.
PrecisionRecall PrecisionRecallAtK(std::span<const std::uint64_t> ranked,
                                   std::span<const std::uint64_t> relevant, std::size_t k);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_METRICS_HPP_
