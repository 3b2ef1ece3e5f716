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

#ifndef CLUSTERFETCH_PRIVATE_SCORING_HPP_
#define CLUSTERFETCH_PRIVATE_SCORING_HPP_

// Online half of the private-scoring baseline. The cluster id travels in the
// clear; only the quantized query and the scores are encrypted.

#include <cstdint>
#include <span>
#include <vector>

#include "clusterfetch/client.hpp"
#include "clusterfetch/scoring.hpp"

namespace clusterfetch {

// One SCORE_QUERY against `cluster`. Returns the exact integer dot products
// of the quantized query with each real document; padding rows are dropped.
// Throws kUnknownCluster or kDecodeSizeMismatch.
std::vector<ScoredDoc> PrivateScore(Client& client, std::span<const float> query,
                                    std::uint32_t cluster, QueryTrace& trace);

// Routes, scores the routed cluster and returns the top-k ids.
std::vector<std::uint64_t> PrivateScoreTopK(Client& client, std::span<const float> query,
                                            std::size_t k, QueryTrace& trace);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_PRIVATE_SCORING_HPP_
