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

#include "clusterfetch/private_scoring.hpp"

#include <chrono>

namespace clusterfetch {
namespace {

using Clock = std::chrono::steady_clock;

double MsSince(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

std::vector<ScoredDoc> PrivateScore(Client& client, std::span<const float> query,
                                    std::uint32_t cluster, QueryTrace& trace) {
  const std::vector<std::int64_t> rows = client.ScoreRows(cluster, query, trace);
  const auto& ids = client.setup().score_row_ids;
  if (cluster >= ids.size() || rows.size() != ids[cluster].size()) {
    throw Error(ErrorCode::kDecodeSizeMismatch,
                "decoded " + std::to_string(rows.size()) + " scores for cluster " +
                    std::to_string(cluster));
  }
  std::vector<ScoredDoc> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (ids[cluster][r] != kPaddingRow) out.push_back({ids[cluster][r], rows[r]});
  }
  return out;
}

std::vector<std::uint64_t> PrivateScoreTopK(Client& client, std::span<const float> query,
                                            std::size_t k, QueryTrace& trace) {
  auto t0 = Clock::now();
  const std::uint32_t cluster = RouteQuery(query, client.setup().centroids);
  trace.route_ms += MsSince(t0);
  const auto scores = PrivateScore(client, query, cluster, trace);
  t0 = Clock::now();
  trace.doc_ids = SelectTopKIds(scores, k);
  trace.rerank_ms += MsSince(t0);
  return trace.doc_ids;
}

}  // namespace clusterfetch
