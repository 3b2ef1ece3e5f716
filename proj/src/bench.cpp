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

#include "clusterfetch/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "clusterfetch/client.hpp"
#include "clusterfetch/graph_search.hpp"
#include "clusterfetch/metrics.hpp"
#include "clusterfetch/private_scoring.hpp"
#include "clusterfetch/synth.hpp"
#include "json.hpp"

namespace clusterfetch {
namespace {

using Clock = std::chrono::steady_clock;

double MsSince(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitList(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T ParseNumber(const std::string& v, std::size_t line, const std::string& key) {
  std::istringstream in(v);
  T out{};
  in >> out;
  if (!in || !in.eof() || (std::is_unsigned_v<T> && v.starts_with('-'))) {
    throw Error(ErrorCode::kInvalidConfig,
                "line " + std::to_string(line) + ": bad value for " + key + ": '" + v + "'");
  }
  return out;
}

std::uint8_t ComponentsFor(const std::string& system) {
  if (system == kSystemClusterFetch) return kClusterFetch;
  if (system == kSystemGraph) return kGraphNodes | kDocFetch;
  if (system == kSystemScoring) return kScoring | kDocFetch;
  throw Error(ErrorCode::kInvalidConfig, "unknown system '" + system + "'");
}

double Mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

BenchConfig ParseBenchConfig(std::istream& in) {
  BenchConfig c;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string text = Trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidConfig, "line " + std::to_string(line) + ": expected key = value");
    }
    const std::string key = Trim(std::string_view(text).substr(0, eq));
    const std::string value = Trim(std::string_view(text).substr(eq + 1));
    if (key == "sizes") {
      c.sizes.clear();
      for (const auto& s : SplitList(value)) c.sizes.push_back(ParseNumber<std::size_t>(s, line, key));
    } else if (key == "systems") {
      c.systems = SplitList(value);
      for (const auto& s : c.systems) ComponentsFor(s);
    } else if (key == "dim") {
      c.dim = ParseNumber<std::size_t>(value, line, key);
    } else if (key == "n_blobs") {
      c.n_blobs = ParseNumber<std::size_t>(value, line, key);
    } else if (key == "blob_std") {
      c.blob_std = ParseNumber<double>(value, line, key);
    } else if (key == "query_noise") {
      c.query_noise = ParseNumber<double>(value, line, key);
    } else if (key == "text_len") {
      c.text_len = ParseNumber<std::size_t>(value, line, key);
    } else if (key == "k") {
      c.k = ParseNumber<std::uint32_t>(value, line, key);
    } else if (key == "topk") {
      c.topk = ParseNumber<std::size_t>(value, line, key);
    } else if (key == "hops") {
      c.hops = ParseNumber<std::uint32_t>(value, line, key);
    } else if (key == "beam") {
      c.beam = ParseNumber<std::uint32_t>(value, line, key);
    } else if (key == "degree") {
      c.degree = ParseNumber<std::uint32_t>(value, line, key);
    } else if (key == "queries") {
      c.queries = ParseNumber<std::size_t>(value, line, key);
    } else if (key == "seed") {
      c.seed = ParseNumber<std::uint64_t>(value, line, key);
    } else {
      throw Error(ErrorCode::kInvalidConfig, "line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }
  if (c.sizes.empty() || c.systems.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "sizes and systems must be non-empty");
  }
  if (c.topk == 0 || c.queries == 0) {
    throw Error(ErrorCode::kInvalidConfig, "topk and queries must be >= 1");
  }
  return c;
}

BenchConfig LoadBenchConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return ParseBenchConfig(in);
}

BenchRow RunCell(const BenchConfig& config, const std::string& system,
                 std::span<const EmbeddingRecord> corpus,
                 const std::vector<std::vector<float>>& queries) {
  BenchRow row;
  row.system = system;
  row.n_docs = corpus.size();

  IndexOptions opts;
  opts.k = config.k;
  opts.seed = SeedFromInt(config.seed);
  opts.degree = config.degree;
  opts.components = ComponentsFor(system);

  auto t0 = Clock::now();
  Index index = BuildIndex(corpus, opts);
  row.k_clusters = index.k();
  if (index.clusters) row.max_cluster_bytes = index.clusters->plain.m_rows();
  const Server server(std::move(index));
  LoopbackTransport transport(server);
  Client client(transport);
  client.Setup();
  row.setup_ms = MsSince(t0);
  row.setup_bytes = client.setup_bytes();

  RowMatrixXf unit = EmbeddingMatrix(corpus);
  NormalizeRows(unit);
  std::vector<std::uint64_t> ids;
  for (const auto& r : corpus) ids.push_back(r.doc_id);

  SearchParams sp;
  sp.hops = config.hops;
  sp.beam = config.beam;
  sp.k = config.topk;

  std::vector<double> query_ms, rag_ms, up, down, ops, ndcg, prec, rec;
  for (const auto& q : queries) {
    QueryTrace trace;
    trace.system = system;
    std::vector<std::uint64_t> ranked;
    const std::uint64_t answers_before = server.answer_count();
    t0 = Clock::now();
    if (system == kSystemClusterFetch) {
      client.Query(q, config.topk, trace);
      ranked = trace.doc_ids;
      query_ms.push_back(MsSince(t0));
      rag_ms.push_back(query_ms.back());
    } else {
      if (system == kSystemGraph) {
        ranked = PrivateSearch(client, q, sp, trace).doc_ids;
      } else {
        ranked = PrivateScoreTopK(client, q, config.topk, trace);
      }
      query_ms.push_back(MsSince(t0));
      client.FetchDocs(ranked, trace, config.topk);
      rag_ms.push_back(MsSince(t0));
    }
    const std::uint64_t expected = system == kSystemClusterFetch ? 1
                                   : system == kSystemScoring
                                       ? 1 + config.topk
                                       : std::uint64_t{config.hops} * config.beam + config.topk;
    if (trace.pir_op_count != expected || server.answer_count() - answers_before != expected) {
      throw Error(ErrorCode::kInternal,
                  system + " query made " + std::to_string(trace.pir_op_count) +
                      " client / " + std::to_string(server.answer_count() - answers_before) +
                      " server operations, expected " + std::to_string(expected));
    }
    up.push_back(static_cast<double>(trace.uplink_bytes));
    down.push_back(static_cast<double>(trace.downlink_bytes));
    ops.push_back(static_cast<double>(trace.pir_op_count));

    const auto truth = ExactTopK(q, unit, ids, std::min<std::size_t>(config.topk, ids.size()));
    ndcg.push_back(NdcgAtK(ranked, truth, config.topk));
    const auto pr = PrecisionRecallAtK(ranked, truth, config.topk);
    prec.push_back(pr.precision);
    rec.push_back(pr.recall);
  }
  row.query_ms_mean = Mean(query_ms);
  row.query_ms_p50 = Percentile(query_ms, 50);
  row.query_ms_p95 = Percentile(query_ms, 95);
  row.uplink_bytes = Mean(up);
  row.downlink_bytes = Mean(down);
  row.pir_ops = Mean(ops);
  row.rag_ready_query_ms = Mean(rag_ms);
  row.ndcg10 = Mean(ndcg);
  row.precision10 = Mean(prec);
  row.recall10 = Mean(rec);
  return row;
}

std::vector<BenchRow> RunBenchmark(const BenchConfig& config) {
  std::vector<BenchRow> rows;
  for (const std::size_t n : config.sizes) {
    std::vector<EmbeddingRecord> corpus;
    std::vector<std::vector<float>> queries;
    std::string corpus_error;
    try {
      SynthOptions so;
      so.n_docs = n;
      so.dim = config.dim;
      so.n_blobs = config.n_blobs;
      so.blob_std = config.blob_std;
      so.seed = config.seed;
      so.text_len = config.text_len;
      corpus = GenSyntheticCorpus(so).records;
      queries = PerturbedQueries(corpus, config.queries, config.query_noise, config.seed + 1);
    } catch (const std::exception& e) {
      corpus_error = e.what();
    }
    for (const auto& system : config.systems) {
      if (!corpus_error.empty()) {
        BenchRow row;
        row.system = system;
        row.n_docs = n;
        row.status = "error: " + corpus_error;
        rows.push_back(row);
        continue;
      }
      try {
        rows.push_back(RunCell(config, system, corpus, queries));
      } catch (const std::exception& e) {
        BenchRow row;
        row.system = system;
        row.n_docs = n;
        row.status = std::string("error: ") + e.what();
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void WriteBenchCsv(std::ostream& out, std::span<const BenchRow> rows) {
  out << "system,n_docs,k_clusters,setup_ms,query_ms_mean,query_ms_p50,query_ms_p95,"
         "uplink_bytes,downlink_bytes,setup_bytes,pir_ops,rag_ready_query_ms,ndcg10,"
         "precision10,recall10,max_cluster_bytes,status\n";
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::setprecision(6) << std::fixed;
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), '"', '\'');
    out << r.system << ',' << r.n_docs << ',' << r.k_clusters << ',' << r.setup_ms << ','
        << r.query_ms_mean << ',' << r.query_ms_p50 << ',' << r.query_ms_p95 << ','
        << r.uplink_bytes << ',' << r.downlink_bytes << ',' << r.setup_bytes << ','
        << r.pir_ops << ',' << r.rag_ready_query_ms << ',' << r.ndcg10 << ','
        << r.precision10 << ',' << r.recall10 << ',' << r.max_cluster_bytes << ",\""
        << status << "\"\n";
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

std::string BenchSummaryJson(const BenchConfig& config, std::span<const BenchRow> rows) {
  nlohmann::json j;
  j["config"] = {{"sizes", config.sizes},   {"systems", config.systems},
                 {"dim", config.dim},       {"n_blobs", config.n_blobs},
                 {"blob_std", config.blob_std}, {"query_noise", config.query_noise},
                 {"text_len", config.text_len}, {"k", config.k},
                 {"topk", config.topk},     {"hops", config.hops},
                 {"beam", config.beam},     {"degree", config.degree},
                 {"queries", config.queries}, {"seed", config.seed}};
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"system", r.system},
                         {"n_docs", r.n_docs},
                         {"k_clusters", r.k_clusters},
                         {"setup_ms", r.setup_ms},
                         {"query_ms_mean", r.query_ms_mean},
                         {"query_ms_p50", r.query_ms_p50},
                         {"query_ms_p95", r.query_ms_p95},
                         {"uplink_bytes", r.uplink_bytes},
                         {"downlink_bytes", r.downlink_bytes},
                         {"setup_bytes", r.setup_bytes},
                         {"pir_ops", r.pir_ops},
                         {"rag_ready_query_ms", r.rag_ready_query_ms},
                         {"ndcg10", r.ndcg10},
                         {"precision10", r.precision10},
                         {"recall10", r.recall10},
                         {"max_cluster_bytes", r.max_cluster_bytes},
                         {"status", r.status}});
  }
  return j.dump(2);
}

AffineFit FitAffine(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need >= 2 paired points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw Error(ErrorCode::kInvalidArgument, "x is constant");
  AffineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.slope * x[i] + f.intercept);
    ss_res += e * e;
  }
  f.r2 = syy == 0 ? (ss_res == 0 ? 1.0 : 0.0) : 1.0 - ss_res / syy;
  return f;
}

double Percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0;
  if (!(q >= 0 && q <= 100)) throw Error(ErrorCode::kInvalidArgument, "percentile out of range");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(values.size())));
  return values[rank == 0 ? 0 : rank - 1];
}

}  // namespace clusterfetch
