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

#ifndef CLUSTERFETCH_BENCH_HPP_
#define CLUSTERFETCH_BENCH_HPP_

// Size sweep over the three retrieval systems.
//
// CSV columns, in order:
//   system,n_docs,k_clusters,setup_ms,query_ms_mean,query_ms_p50,
//   query_ms_p95,uplink_bytes,downlink_bytes,setup_bytes,pir_ops,
//   rag_ready_query_ms,ndcg10,precision10,recall10,max_cluster_bytes,status
//
// Byte and operation counts are per query and cover the content-delivering
// query: graph and scoring rows include the K document fetches.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "clusterfetch/corpus.hpp"
#include "clusterfetch/graph_search.hpp"

namespace clusterfetch {

inline constexpr char kSystemClusterFetch[] = "cluster-fetch";
inline constexpr char kSystemGraph[] = "graph";
inline constexpr char kSystemScoring[] = "scoring";

struct BenchConfig {
  std::vector<std::size_t> sizes = {500, 1000, 2000, 5000};
  std::vector<std::string> systems = {kSystemClusterFetch, kSystemGraph, kSystemScoring};
  std::size_t dim = 16;
  std::size_t n_blobs = 20;
  double blob_std = 0.25;
  double query_noise = 0.02;
  std::size_t text_len = 64;
  std::uint32_t k = 0;  // 0: round(sqrt(N))
  std::size_t topk = 10;
  std::uint32_t hops = kDefaultHops;
  std::uint32_t beam = kDefaultBeam;
  std::uint32_t degree = 16;
  std::size_t queries = 100;
  std::uint64_t seed = 1;
};

// Flat "key = value" lines; '#' starts a comment; list values are comma
// separated. Throws kInvalidConfig naming the line.
BenchConfig ParseBenchConfig(std::istream& in);
BenchConfig LoadBenchConfig(const std::filesystem::path& path);

struct BenchRow {
  std::string system;
  std::size_t n_docs = 0;
  std::uint32_t k_clusters = 0;
  double setup_ms = 0;
  double query_ms_mean = 0;
  double query_ms_p50 = 0;
  double query_ms_p95 = 0;
  double uplink_bytes = 0;
  double downlink_bytes = 0;
  std::uint64_t setup_bytes = 0;
  double pir_ops = 0;
  double rag_ready_query_ms = 0;
  double ndcg10 = 0;
  double precision10 = 0;
  double recall10 = 0;
  std::uint64_t max_cluster_bytes = 0;
  std::string status = "ok";
};

// One (system, corpus) cell over in-process loopback. Errors propagate; a
// query whose PIR operation count (client or server side) differs from 1,
// 1 + topk or hops * beam + topk raises kInternal.
BenchRow RunCell(const BenchConfig& config, const std::string& system,
                 std::span<const EmbeddingRecord> corpus,
                 const std::vector<std::vector<float>>& queries);

// Every (size, system) cell; a failing cell yields a row whose status
// carries the error and the sweep continues.
std::vector<BenchRow> RunBenchmark(const BenchConfig& config);

void WriteBenchCsv(std::ostream& out, std::span<const BenchRow> rows);
std::string BenchSummaryJson(const BenchConfig& config, std::span<const BenchRow> rows);

struct AffineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

// Least-squares y = slope * x + intercept; r2 = 1 when y is constant and
// fitted exactly. Throws kInvalidArgument for fewer than two points or
// constant x.
AffineFit FitAffine(std::span<const double> x, std::span<const double> y);

// Nearest-rank percentile, q in [0, 100].
double Percentile(std::vector<double> values, double q);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_BENCH_HPP_
