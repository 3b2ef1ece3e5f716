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

#ifndef CLUSTERFETCH_PACKING_HPP_
#define CLUSTERFETCH_PACKING_HPP_

// Byte framing of document groups and the column-per-group matrices built
// from them.
//
// Framed group layout (all integers little-endian):
//   [u32 doc_count]
//   doc_count x { [u64 doc_id][u32 text_len][d x f32 embedding][text bytes] }
//   zero padding to the target length

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "clusterfetch/bytes.hpp"
#include "clusterfetch/corpus.hpp"
#include "clusterfetch/lwe.hpp"

namespace clusterfetch {

inline constexpr std::size_t kDefaultChunkSize = 256;

std::size_t FramedDocSize(const EmbeddingRecord& doc);
std::size_t FramedSize(std::span<const EmbeddingRecord> docs);

// Throws kClusterOverflow when the framed bytes exceed
// target_chunks * chunk_size.
Bytes PackClusterBytes(std::span<const EmbeddingRecord> docs, std::size_t chunk_size,
                       std::size_t target_chunks);

// Inverse of PackClusterBytes for embeddings of width `dim`; trailing
// padding is ignored. Throws kFraming on any length overrun.
std::vector<EmbeddingRecord> UnpackCluster(std::span<const std::uint8_t> stream,
                                           std::size_t dim);

// m x n byte matrix, column j = group j's framed stream (p = 256, one byte
// per Z_p entry).
struct ChunkMatrix {
  std::size_t chunk_size = kDefaultChunkSize;
  ByteMatrix entries;

  std::size_t m_rows() const { return static_cast<std::size_t>(entries.rows()); }
  std::size_t n_cols() const { return static_cast<std::size_t>(entries.cols()); }
  std::size_t chunks_per_column() const { return m_rows() / chunk_size; }
  Bytes Column(std::size_t j) const;

  bool operator==(const ChunkMatrix& o) const {
    return chunk_size == o.chunk_size && SameMatrix(entries, o.entries);
  }
};

// Throws kUnequalStreamLengths, or kInvalidArgument for p != 256 or an empty
// stream list.
ChunkMatrix BuildChunkMatrix(std::span<const Bytes> streams, std::size_t chunk_size,
                             std::uint64_t plain_mod = 256);

// One framed document (doc_count = 1) per column, in corpus order, padded to
// the longest framed document rounded up to whole chunks.
struct DocMatrix {
  ChunkMatrix matrix;
  std::vector<std::uint64_t> doc_ids;  // column -> doc_id

  std::optional<std::size_t> ColumnOf(std::uint64_t doc_id) const;
  bool operator==(const DocMatrix&) const = default;
};

DocMatrix BuildDocMatrix(std::span<const EmbeddingRecord> records, std::size_t chunk_size);

std::size_t CeilDiv(std::size_t a, std::size_t b);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_PACKING_HPP_
