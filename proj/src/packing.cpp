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

#include "clusterfetch/packing.hpp"

#include <algorithm>
#include <limits>

namespace clusterfetch {

std::size_t CeilDiv(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

std::size_t FramedDocSize(const EmbeddingRecord& doc) {
  return sizeof(std::uint64_t) + sizeof(std::uint32_t) +
         doc.embedding.size() * sizeof(float) + doc.text.size();
}

std::size_t FramedSize(std::span<const EmbeddingRecord> docs) {
  std::size_t total = sizeof(std::uint32_t);
  for (const auto& d : docs) total += FramedDocSize(d);
  return total;
}

Bytes PackClusterBytes(std::span<const EmbeddingRecord> docs, std::size_t chunk_size,
                       std::size_t target_chunks) {
  if (chunk_size == 0) throw Error(ErrorCode::kInvalidArgument, "chunk_size must be >= 1");
  const std::size_t capacity = chunk_size * target_chunks;
  const std::size_t framed = FramedSize(docs);
  if (framed > capacity) {
    throw Error(ErrorCode::kClusterOverflow,
                std::to_string(framed) + " framed bytes exceed capacity " +
                    std::to_string(capacity));
  }
  ByteWriter w;
  w.reserve(capacity);
  w.put(static_cast<std::uint32_t>(docs.size()));
  for (const auto& d : docs) {
    if (d.text.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(ErrorCode::kInvalidArgument, "text longer than 4 GiB");
    }
    w.put(d.doc_id);
    w.put(static_cast<std::uint32_t>(d.text.size()));
    w.put_span(std::span<const float>(d.embedding));
    w.put_string(d.text);
  }
  Bytes out = w.take();
  out.resize(capacity, 0);
  return out;
}

std::vector<EmbeddingRecord> UnpackCluster(std::span<const std::uint8_t> stream,
                                           std::size_t dim) {
  ByteReader r(stream, ErrorCode::kFraming);
  const auto count = r.get<std::uint32_t>();
  // Each framed document takes at least 12 + 4*dim bytes.
  r.require_items(count, 12 + 4 * dim);
  std::vector<EmbeddingRecord> docs(count);
  for (auto& d : docs) {
    d.doc_id = r.get<std::uint64_t>();
    const auto text_len = r.get<std::uint32_t>();
    d.embedding.resize(dim);
    r.get_into(std::span<float>(d.embedding));
    d.text = r.get_string(text_len);
  }
  return docs;
}

Bytes ChunkMatrix::Column(std::size_t j) const {
  Bytes out(m_rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return out;
}

ChunkMatrix BuildChunkMatrix(std::span<const Bytes> streams, std::size_t chunk_size,
                             std::uint64_t plain_mod) {
  if (plain_mod != 256) {
    throw Error(ErrorCode::kInvalidArgument, "byte packing requires p = 256");
  }
  if (streams.empty()) throw Error(ErrorCode::kInvalidArgument, "no streams");
  if (chunk_size == 0) throw Error(ErrorCode::kInvalidArgument, "chunk_size must be >= 1");
  const std::size_t m = streams.front().size();
  for (std::size_t j = 0; j < streams.size(); ++j) {
    if (streams[j].size() != m) {
      throw Error(ErrorCode::kUnequalStreamLengths,
                  "stream " + std::to_string(j) + " has " +
                      std::to_string(streams[j].size()) + " bytes, stream 0 has " +
                      std::to_string(m));
    }
  }
  ChunkMatrix cm;
  cm.chunk_size = chunk_size;
  cm.entries.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(streams.size()));
  for (std::size_t j = 0; j < streams.size(); ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      cm.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = streams[j][i];
    }
  }
  return cm;
}

std::optional<std::size_t> DocMatrix::ColumnOf(std::uint64_t doc_id) const {
  auto it = std::find(doc_ids.begin(), doc_ids.end(), doc_id);
  if (it == doc_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - doc_ids.begin());
}

DocMatrix BuildDocMatrix(std::span<const EmbeddingRecord> records, std::size_t chunk_size) {
  if (records.empty()) throw Error(ErrorCode::kInvalidArgument, "empty corpus");
  std::size_t longest = 0;
  for (const auto& r : records) longest = std::max(longest, FramedSize({&r, 1}));
  const std::size_t chunks = CeilDiv(longest, chunk_size);
  std::vector<Bytes> streams;
  streams.reserve(records.size());
  DocMatrix dm;
  for (const auto& r : records) {
    streams.push_back(PackClusterBytes({&r, 1}, chunk_size, chunks));
    dm.doc_ids.push_back(r.doc_id);
  }
  dm.matrix = BuildChunkMatrix(streams, chunk_size);
  return dm;
}

}  // namespace clusterfetch
