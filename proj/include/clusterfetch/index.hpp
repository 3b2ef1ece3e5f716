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

#ifndef CLUSTERFETCH_INDEX_HPP_
#define CLUSTERFETCH_INDEX_HPP_

// The offline index: cluster model, PIR-addressable byte matrices and their
// hints, persisted as a "PRAG1" file.
//
// File layout (little-endian):
//   "PRAG1" | u16 version | public setup block | private block
//
// The public setup block is exactly the SETUP_RESP payload for the
// components it carries:
//   u8 components | u32 dim | u32 chunk_size | u64 n_docs
//   u32 k | k*dim f32 centroids
//   [doc or graph] n_docs x u64 doc ids (column order of the doc and node
//             matrices)
//   [cluster] params | u32 rows | u32 cols | hint
//   [doc]     params | u32 rows | u32 cols | hint
//   [graph]   params | u32 rows | u32 cols | u32 degree | f32 maxabs |
//             u32 medoid | k x u32 representatives | hint
//   [scoring] params | u32 capacity | f32 maxabs | k*capacity u64 row ids |
//             k hints
// where params = u32 lwe_dim | u8 cipher_mod_bits | u8 profile |
// u64 plain_mod | u32 err_bound | 32-byte seed, and every matrix is
// u32 rows | u32 cols | row-major entries (hints: 4 or 8 bytes per residue).
//
// The private block holds n_docs x u64 doc ids (corpus order), n_docs x u32
// cluster assignments and the plaintext
// matrices of each present component (u8 entries; i8 for scoring).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "clusterfetch/bytes.hpp"
#include "clusterfetch/corpus.hpp"
#include "clusterfetch/graph.hpp"
#include "clusterfetch/kmeans.hpp"
#include "clusterfetch/lwe.hpp"
#include "clusterfetch/packing.hpp"
#include "clusterfetch/scoring.hpp"

namespace clusterfetch {

inline constexpr char kIndexMagic[] = "PRAG1";
inline constexpr std::uint16_t kIndexVersion = 1;

enum Component : std::uint8_t {
  kClusterFetch = 1,
  kDocFetch = 2,
  kGraphNodes = 4,
  kScoring = 8,
  kAllComponents = 15,
};

// Components whose columns are documents and so need the public id map.
inline constexpr std::uint8_t kIdMapComponents = kDocFetch | kGraphNodes;

struct FetchDatabase {
  LweParams params;
  ChunkMatrix plain;
  AnyMatrix hint;

  bool operator==(const FetchDatabase& o) const {
    return params == o.params && plain == o.plain && SameMatrix(hint, o.hint);
  }
};

struct Index {
  std::uint8_t components = 0;
  std::uint32_t dim = 0;
  std::uint32_t chunk_size = kDefaultChunkSize;
  std::vector<std::uint64_t> doc_ids;  // corpus order
  RowMatrixXf centroids;               // k x d, L2-normalized
  std::vector<std::uint32_t> assignments;

  std::optional<FetchDatabase> clusters;
  std::optional<FetchDatabase> docs;
  std::optional<FetchDatabase> nodes;
  GraphMeta graph;
  std::optional<LweParams> score_params;
  ScoreDatabase scoring;
  std::vector<Matrix<std::uint64_t>> score_hints;

  std::uint32_t k() const { return static_cast<std::uint32_t>(centroids.rows()); }
  std::size_t n_docs() const { return doc_ids.size(); }
  bool operator==(const Index& o) const;
};

struct IndexOptions {
  std::uint32_t k = 0;  // 0: round(sqrt(N))
  std::uint32_t chunk_size = kDefaultChunkSize;
  Seed seed{};
  std::uint32_t degree = kDefaultDegree;
  std::uint8_t components = kAllComponents;
  std::uint32_t kmeans_iters = 50;
  double kmeans_tol = 1e-4;
};

Index BuildIndex(std::span<const EmbeddingRecord> records, const IndexOptions& options);

// Hint D * A for a byte matrix under `params`.
AnyMatrix ComputeByteHint(const LweParams& params, const ByteMatrix& plain);

struct PublicFetchDb {
  LweParams params;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  AnyMatrix hint;
};

// What a client learns at setup.
struct PublicSetup {
  std::uint8_t components = 0;
  std::uint32_t dim = 0;
  std::uint32_t chunk_size = 0;
  std::uint64_t n_docs = 0;
  RowMatrixXf centroids;
  std::vector<std::uint64_t> doc_ids;
  std::optional<PublicFetchDb> clusters;
  std::optional<PublicFetchDb> docs;
  std::optional<PublicFetchDb> nodes;
  GraphMeta graph;
  std::optional<LweParams> score_params;
  std::uint32_t score_capacity = 0;
  float score_maxabs = 1.0f;
  std::vector<std::vector<std::uint64_t>> score_row_ids;
  std::vector<Matrix<std::uint64_t>> score_hints;

  std::uint32_t k() const { return static_cast<std::uint32_t>(centroids.rows()); }
};

// Writes the components in `mask` that the index has.
void WritePublicSetup(ByteWriter& w, const Index& index, std::uint8_t mask);
// Underruns raise the reader's error code; inconsistent fields raise kParse.
PublicSetup ReadPublicSetup(ByteReader& r);

Bytes SerializeIndex(const Index& index);
// kBadMagic, kVersionUnsupported, kTruncatedFile; nothing is returned on
// failure.
Index DeserializeIndex(std::span<const std::uint8_t> bytes);

void SaveIndex(const Index& index, const std::filesystem::path& path);
Index LoadIndex(const std::filesystem::path& path);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_INDEX_HPP_
