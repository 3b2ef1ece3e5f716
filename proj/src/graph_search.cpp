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

#include "clusterfetch/graph_search.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <unordered_map>

#include "clusterfetch/quantize.hpp"

namespace clusterfetch {
namespace {

using Clock = std::chrono::steady_clock;

double MsSince(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Priority {
  double score;
  std::uint32_t rank;
  std::uint32_t node;
  // True when `this` should be fetched before `o`.
  bool Before(const Priority& o) const {
    if (score != o.score) return score > o.score;
    if (rank != o.rank) return rank < o.rank;
    return node < o.node;
  }
};

void CheckSearch(const Client& client, std::span<const float> query,
                 const SearchParams& params) {
  const PublicSetup& s = client.setup();
  if (!s.nodes) throw Error(ErrorCode::kInvalidArgument, "setup has no graph nodes");
  if (params.hops == 0 || params.beam == 0) {
    throw Error(ErrorCode::kInvalidArgument, "hops and beam must be >= 1");
  }
  if (query.size() != s.dim) {
    throw Error(ErrorCode::kDimensionMismatch, "query has " + std::to_string(query.size()) +
                                                   " dims, index has " + std::to_string(s.dim));
  }
}

GraphSearchResult Traverse(Client& client, std::span<const float> query,
                           std::vector<std::uint32_t> entries, const SearchParams& params,
                           QueryTrace& trace) {
  const PublicSetup& setup = client.setup();
  const GraphMeta& meta = setup.graph;
  GraphSearchResult result;
  std::unordered_map<std::uint32_t, double> visited;
  std::vector<std::uint32_t> visit_order;
  std::unordered_map<std::uint32_t, Priority> candidates;

  // Best unvisited candidate, if any.
  auto next_candidate = [&]() -> std::optional<std::uint32_t> {
    const Priority* best = nullptr;
    for (const auto& [node, p] : candidates) {
      if (!visited.contains(node) && (!best || p.Before(*best))) best = &p;
    }
    if (!best) return std::nullopt;
    return best->node;
  };

  std::uint32_t dummies = 0;
  for (std::uint32_t hop = 0; hop < params.hops; ++hop) {
    for (std::uint32_t slot = 0; slot < params.beam; ++slot) {
      auto t0 = Clock::now();
      std::optional<std::uint32_t> pick;
      if (hop == 0 && slot < entries.size()) {
        if (!visited.contains(entries[slot])) pick = entries[slot];
      } else {
        pick = next_candidate();
      }
      // Dummy re-fetch keeps the number of operations fixed.
      const std::uint32_t node =
          pick ? *pick
               : (visit_order.empty() ? entries.front()
                                      : visit_order[dummies++ % visit_order.size()]);
      trace.rerank_ms += MsSince(t0);

      const Bytes column = client.FetchColumn(TargetMatrix::kNode, node, trace);
      result.fetched.push_back(node);
      if (!pick) continue;

      t0 = Clock::now();
      const NodeRecord rec = DecodeNodeRecord(column, setup.dim, meta.degree);
      if (rec.node_id != node) {
        throw Error(ErrorCode::kProtocol, "node record " + std::to_string(rec.node_id) +
                                              " in column " + std::to_string(node));
      }
      const std::vector<float> v = Dequantize(rec.quantized, meta.maxabs);
      const double score = Cosine(query, v);
      trace.decode_ms += MsSince(t0);

      t0 = Clock::now();
      visited.emplace(node, score);
      visit_order.push_back(node);
      for (std::uint32_t rank = 0; rank < rec.neighbors.size(); ++rank) {
        const std::uint32_t m = rec.neighbors[rank];
        if (m == node || visited.contains(m) || m >= setup.n_docs) continue;
        const Priority p{score, rank, m};
        auto it = candidates.find(m);
        if (it == candidates.end()) {
          candidates.emplace(m, p);
        } else if (p.Before(it->second)) {
          it->second = p;
        }
      }
      trace.rerank_ms += MsSince(t0);
    }
  }

  const auto t0 = Clock::now();
  std::vector<std::pair<double, std::uint64_t>> ranked;
  ranked.reserve(visited.size());
  for (const auto& [node, score] : visited) ranked.emplace_back(score, setup.doc_ids[node]);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  ranked.resize(std::min(params.k, ranked.size()));
  for (const auto& [score, id] : ranked) {
    result.doc_ids.push_back(id);
    result.scores.push_back(score);
  }
  trace.doc_ids = result.doc_ids;
  trace.rerank_ms += MsSince(t0);
  return result;
}

}  // namespace

GraphSearchResult PrivateSearch(Client& client, std::span<const float> query,
                                const SearchParams& params, QueryTrace& trace) {
  CheckSearch(client, query, params);
  const auto t0 = Clock::now();
  const PublicSetup& s = client.setup();
  const RowMatrixXf& c = s.centroids;
  std::vector<std::pair<double, std::uint32_t>> order;
  for (Eigen::Index j = 0; j < c.rows(); ++j) {
    order.emplace_back(Cosine(query, {c.row(j).data(), s.dim}), static_cast<std::uint32_t>(j));
  }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::uint32_t> entries;
  for (const auto& [score, j] : order) {
    if (entries.size() == params.beam) break;
    if (j >= s.graph.representatives.size()) break;
    const std::uint32_t rep = s.graph.representatives[j];
    if (std::find(entries.begin(), entries.end(), rep) == entries.end()) entries.push_back(rep);
  }
  if (entries.empty()) entries.push_back(s.graph.medoid);
  trace.route_ms += std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  return Traverse(client, query, std::move(entries), params, trace);
}

GraphSearchResult PrivateSearch(Client& client, std::span<const float> query,
                                std::uint32_t entry_id, const SearchParams& params,
                                QueryTrace& trace) {
  CheckSearch(client, query, params);
  if (entry_id >= client.setup().n_docs) {
    throw Error(ErrorCode::kInvalidEntryPoint,
                "entry " + std::to_string(entry_id) + " of " +
                    std::to_string(client.setup().n_docs) + " nodes");
  }
  return Traverse(client, query, {entry_id}, params, trace);
}

}  // namespace clusterfetch
