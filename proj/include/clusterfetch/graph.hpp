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

#ifndef CLUSTERFETCH_GRAPH_HPP_
#define CLUSTERFETCH_GRAPH_HPP_

// Offline half of the graph-traversal baseline: an exact directed k-NN graph
// and its fixed-size node records, one record per column of a byte matrix.
//
// Node record layout (little-endian):
//   [u64 node_id][d bytes: quantized value + 128][degree x u32 neighbor id]

#include <cstdint>
#include <span>
#include <vector>

#include "clusterfetch/corpus.hpp"
#include "clusterfetch/kmeans.hpp"
#include "clusterfetch/packing.hpp"

namespace clusterfetch {

inline constexpr std::uint32_t kDefaultDegree = 16;

using Adjacency = std::vector<std::vector<std::uint32_t>>;

// Top-`degree` neighbors of every row by cosine, most similar first, ties by
// smaller node id, self excluded. O(N^2 d). Throws kInvalidDegree unless
// 1 <= degree < N.
Adjacency BuildKnnGraph(const RowMatrixXf& vectors, std::uint32_t degree);

struct NodeRecord {
  std::uint64_t node_id = 0;
  std::vector<std::int8_t> quantized;
  std::vector<std::uint32_t> neighbors;

  bool operator==(const NodeRecord&) const = default;
};

std::size_t NodeRecordSize(std::size_t dim, std::uint32_t degree);

// Column j holds node j's record. Lists shorter than `degree` are padded
// with the node's own id.
ChunkMatrix EncodeNodeRecords(const Adjacency& graph, const RowMatrixXf& vectors,
                              std::uint32_t degree, float maxabs);

NodeRecord DecodeNodeRecord(std::span<const std::uint8_t> bytes, std::size_t dim,
                            std::uint32_t degree);

// Public traversal metadata.
struct GraphMeta {
  std::uint32_t degree = kDefaultDegree;
  float maxabs = 1.0f;
  std::uint32_t medoid = 0;
  // Per cluster: the member closest to the (normalized) centroid.
  std::vector<std::uint32_t> representatives;

  bool operator==(const GraphMeta&) const = default;
};

// Row with the largest mean cosine to all rows (smallest index on ties).
std::uint32_t Medoid(const RowMatrixXf& vectors);

std::vector<std::uint32_t> ClusterRepresentatives(const RowMatrixXf& vectors,
                                                  const ClusterModel& model);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_GRAPH_HPP_
