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

#include "clusterfetch/graph.hpp"

#include <algorithm>
#include <numeric>

#include "clusterfetch/error.hpp"
#include "clusterfetch/quantize.hpp"

namespace clusterfetch {

Adjacency BuildKnnGraph(const RowMatrixXf& vectors, std::uint32_t degree) {
  const auto n = static_cast<std::size_t>(vectors.rows());
  if (degree < 1 || degree >= n) {
    throw Error(ErrorCode::kInvalidDegree, "degree " + std::to_string(degree) +
                                               " needs 1 <= degree < " +
                                               std::to_string(n));
  }
  RowMatrixXf unit = vectors;
  NormalizeRows(unit);
  Adjacency adj(n);
  Eigen::VectorXf sims(static_cast<Eigen::Index>(n));
  std::vector<std::uint32_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    sims.noalias() = unit * unit.row(static_cast<Eigen::Index>(i)).transpose();
    order.resize(n);
    std::iota(order.begin(), order.end(), 0u);
    order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));
    std::partial_sort(order.begin(), order.begin() + degree, order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        if (sims[a] != sims[b]) return sims[a] > sims[b];
                        return a < b;
                      });
    adj[i].assign(order.begin(), order.begin() + degree);
  }
  return adj;
}

std::size_t NodeRecordSize(std::size_t dim, std::uint32_t degree) {
  return sizeof(std::uint64_t) + dim + sizeof(std::uint32_t) * degree;
}

ChunkMatrix EncodeNodeRecords(const Adjacency& graph, const RowMatrixXf& vectors,
                              std::uint32_t degree, float maxabs) {
  const auto n = static_cast<std::size_t>(vectors.rows());
  const auto dim = static_cast<std::size_t>(vectors.cols());
  if (graph.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "graph and vector counts differ");
  }
  const std::size_t rec = NodeRecordSize(dim, degree);
  std::vector<Bytes> columns;
  columns.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (graph[i].size() > degree) {
      throw Error(ErrorCode::kInvalidDegree, "node " + std::to_string(i) + " has too many neighbors");
    }
    ByteWriter w;
    w.reserve(rec);
    w.put(static_cast<std::uint64_t>(i));
    for (std::size_t c = 0; c < dim; ++c) {
      const auto q = QuantizeValue(vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)), maxabs);
      w.put(static_cast<std::uint8_t>(q + 128));
    }
    for (std::uint32_t s = 0; s < degree; ++s) {
      w.put(s < graph[i].size() ? graph[i][s] : static_cast<std::uint32_t>(i));
    }
    columns.push_back(w.take());
  }
  return BuildChunkMatrix(columns, rec);
}

NodeRecord DecodeNodeRecord(std::span<const std::uint8_t> bytes, std::size_t dim,
                            std::uint32_t degree) {
  ByteReader r(bytes, ErrorCode::kFraming);
  NodeRecord node;
  node.node_id = r.get<std::uint64_t>();
  node.quantized.resize(dim);
  for (auto& q : node.quantized) q = static_cast<std::int8_t>(static_cast<int>(r.get<std::uint8_t>()) - 128);
  node.neighbors.resize(degree);
  r.get_into(std::span<std::uint32_t>(node.neighbors));
  return node;
}

std::uint32_t Medoid(const RowMatrixXf& vectors) {
  if (vectors.rows() == 0) throw Error(ErrorCode::kInvalidArgument, "empty corpus");
  RowMatrixXf unit = vectors;
  NormalizeRows(unit);
  const Eigen::RowVectorXf sum = unit.colwise().sum();
  const Eigen::VectorXf mean_cos = unit * sum.transpose();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < mean_cos.size(); ++i) {
    if (mean_cos[i] > mean_cos[best]) best = i;
  }
  return static_cast<std::uint32_t>(best);
}

std::vector<std::uint32_t> ClusterRepresentatives(const RowMatrixXf& vectors,
                                                  const ClusterModel& model) {
  RowMatrixXf unit = vectors;
  NormalizeRows(unit);
  RowMatrixXf centroids = model.centroids;
  NormalizeRows(centroids);
  const auto members = model.Members();
  std::vector<std::uint32_t> reps(members.size(), 0);
  for (std::size_t j = 0; j < members.size(); ++j) {
    float best = -2.0f;
    for (auto i : members[j]) {
      const float c = unit.row(i).dot(centroids.row(static_cast<Eigen::Index>(j)));
      if (c > best) {
        best = c;
        reps[j] = i;
      }
    }
  }
  return reps;
}

}  // namespace clusterfetch
