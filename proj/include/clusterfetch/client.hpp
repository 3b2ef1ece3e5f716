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

#ifndef CLUSTERFETCH_CLIENT_HPP_
#define CLUSTERFETCH_CLIENT_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "clusterfetch/index.hpp"
#include "clusterfetch/net.hpp"
#include "clusterfetch/prg.hpp"
#include "clusterfetch/server.hpp"
#include "clusterfetch/wire.hpp"

namespace clusterfetch {

// One request, one response.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual Frame RoundTrip(const Frame& request) = 0;
};

// In-process transport that still encodes and decodes every frame, so byte
// counts and parsing match the TCP path.
class LoopbackTransport : public Transport {
 public:
  explicit LoopbackTransport(const Server& server) : server_(server) {}
  Frame RoundTrip(const Frame& request) override;

 private:
  const Server& server_;
};

class TcpTransport : public Transport {
 public:
  explicit TcpTransport(const HostPort& server);
  Frame RoundTrip(const Frame& request) override;

 private:
  Socket socket_;
};

// Per-query accounting. Byte counters are framed wire sizes.
struct QueryTrace {
  std::string system;
  std::uint64_t uplink_bytes = 0;
  std::uint64_t downlink_bytes = 0;
  std::uint64_t setup_bytes = 0;
  std::uint64_t pir_op_count = 0;
  double route_ms = 0;
  double encrypt_ms = 0;
  double server_ms = 0;
  double decode_ms = 0;
  double rerank_ms = 0;
  std::vector<std::uint64_t> doc_ids;

  double total_ms() const { return route_ms + encrypt_ms + server_ms + decode_ms + rerank_ms; }
  // Flat JSON object.
  std::string ToJson() const;
};

struct RankedResult {
  std::uint64_t doc_id = 0;
  double score = 0;  // cosine similarity
  std::string text;
  bool operator==(const RankedResult&) const = default;
};

// Index of the centroid with the largest cosine to `query`, smallest index on
// ties. Throws kDimensionMismatch.
std::uint32_t RouteQuery(std::span<const float> query, const RowMatrixXf& centroids);

// Top min(k, docs.size()) by cosine, descending, ascending doc_id on ties.
std::vector<RankedResult> RerankTopK(std::span<const float> query,
                                     std::span<const EmbeddingRecord> docs, std::size_t k);

// Cosine similarity; 0 when either vector is zero.
double Cosine(std::span<const float> a, std::span<const float> b);

// Client state after setup: the public metadata plus the expanded public
// matrices. Every PIR operation uses a fresh secret key.
class Client {
 public:
  explicit Client(Transport& transport, const Seed& rng_seed = RandomSeed());

  // Fetches the public setup for the components in `mask`.
  void Setup(std::uint8_t mask = kAllComponents);
  const PublicSetup& setup() const { return setup_; }
  std::uint64_t setup_bytes() const { return setup_bytes_; }

  // Sends `request`, accounting bytes and server time in `trace`.
  Frame Exchange(const Frame& request, QueryTrace& trace);

  // One PIR operation: the decoded column `column` of `target`.
  Bytes FetchColumn(TargetMatrix target, std::uint32_t column, QueryTrace& trace);
  Bytes FetchCluster(std::uint32_t cluster, QueryTrace& trace) {
    return FetchColumn(TargetMatrix::kCluster, cluster, trace);
  }

  // Route, fetch the cluster, unpack and rerank.
  std::vector<RankedResult> Query(std::span<const float> query, std::size_t k,
                                  QueryTrace& trace);

  // One PIR operation per id, plus re-fetches of the first id until
  // `pad_to` operations were made. Throws kUnknownDocId.
  std::vector<EmbeddingRecord> FetchDocs(std::span<const std::uint64_t> doc_ids,
                                         QueryTrace& trace, std::size_t pad_to = 0);

  // Fresh 32-byte seeds drawn from the client's generator.
  Seed NextSeed();

  // Decoded scores for `cluster` (centered integers, one per padded row) of the
  // unit-normalized query.
  std::vector<std::int64_t> ScoreRows(std::uint32_t cluster, std::span<const float> query,
                                      QueryTrace& trace);

 private:
  struct Db {
    PublicFetchDb pub;
    std::variant<Matrix<std::uint32_t>, Matrix<std::uint64_t>> a;
    std::variant<PirHint<std::uint32_t>, PirHint<std::uint64_t>> hint;
  };
  const Db& DbFor(TargetMatrix target) const;

  Transport& transport_;
  Prg rng_;
  PublicSetup setup_;
  std::uint64_t setup_bytes_ = 0;
  std::optional<Db> clusters_;
  std::optional<Db> docs_;
  std::optional<Db> nodes_;
  Matrix<std::uint64_t> score_a_;
  std::vector<PirHint<std::uint64_t>> score_hints_;
};

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_CLIENT_HPP_
