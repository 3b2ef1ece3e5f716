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

#ifndef CLUSTERFETCH_GRAPH_SEARCH_HPP_
#define CLUSTERFETCH_GRAPH_SEARCH_HPP_

// Online half of the graph-traversal baseline: a beam search over the k-NN
// graph whose every node read is a PIR fetch of that node's record.

#include <cstdint>
#include <span>
#include <vector>

#include "clusterfetch/client.hpp"

namespace clusterfetch {

inline constexpr std::uint32_t kDefaultHops = 4;
inline constexpr std::uint32_t kDefaultBeam = 8;

struct SearchParams {
  std::uint32_t hops = kDefaultHops;
  std::uint32_t beam = kDefaultBeam;
  std::size_t k = 10;
};

struct GraphSearchResult {
  std::vector<std::uint64_t> doc_ids;  // top-k, best first
  std::vector<double> scores;          // cosine against the dequantized vector
  std::vector<std::uint32_t> fetched;  // node fetched by each PIR operation
};

// Exactly hops * beam PIR fetches. The first hop starts with the
// representatives of the `beam` centroids closest to the query. Every other
// slot fetches the best unvisited candidate known so far, or re-fetches a
// visited node when none is left. Candidates are ordered by the score of the
// node that proposed them, then by their rank in its neighbor list, then by
// node id.
GraphSearchResult PrivateSearch(Client& client, std::span<const float> query,
                                const SearchParams& params, QueryTrace& trace);

// Same traversal from a single entry node. Throws kInvalidEntryPoint.
GraphSearchResult PrivateSearch(Client& client, std::span<const float> query,
                                std::uint32_t entry_id, const SearchParams& params,
                                QueryTrace& trace);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_GRAPH_SEARCH_HPP_
