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

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "clusterfetch/graph.hpp"
#include "clusterfetch/graph_search.hpp"
#include "clusterfetch/metrics.hpp"
#include "clusterfetch/quantize.hpp"
#include "clusterfetch/server.hpp"
#include "clusterfetch/synth.hpp"
#include "doctest.h"
#include "test_support.hpp"

namespace cf = clusterfetch;

namespace {

double NaiveCosine(const float* a, const float* b, std::size_t d) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < d; ++i) {
    ab += double(a[i]) * b[i];
    aa += double(a[i]) * a[i];
    bb += double(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// Brute-force neighbor lists: sort all other nodes by (-cosine, id).
cf::Adjacency OracleKnn(const cf::RowMatrixXf& x, std::uint32_t degree) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  cf::Adjacency out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) all.emplace_back(-NaiveCosine(x.row(i).data(), x.row(j).data(), d), j);
    }
    std::sort(all.begin(), all.end());
    for (std::uint32_t t = 0; t < degree; ++t) out[i].push_back(all[t].second);
  }
  return out;
}

struct GraphFixture {
  std::vector<cf::EmbeddingRecord> records;
  cf::Index index;
  std::unique_ptr<cf::Server> server;
  std::unique_ptr<cf::LoopbackTransport> transport;
  std::unique_ptr<cf::Client> client;

  GraphFixture(std::size_t n, std::uint32_t degree, std::uint64_t seed = 1) {
    cf::SynthOptions so;
    so.n_docs = n;
    so.seed = seed;
    records = cf::GenSyntheticCorpus(so).records;
    cf::IndexOptions opts;
    opts.degree = degree;
    opts.components = cf::kGraphNodes | cf::kDocFetch;
    opts.seed = cf::SeedFromInt(seed);
    index = cf::BuildIndex(records, opts);
    server = std::make_unique<cf::Server>(index);
    transport = std::make_unique<cf::LoopbackTransport>(*server);
    client = std::make_unique<cf::Client>(*transport, cf::SeedFromInt(seed + 7));
    client->Setup(cf::kGraphNodes | cf::kDocFetch);
  }

  cf::RowMatrixXf Unit() const {
    auto m = cf::EmbeddingMatrix(records);
    m.rowwise().normalize();
    return m;
  }
};

double MeanRecall(GraphFixture& fx, const std::vector<std::vector<float>>& queries,
                  const cf::SearchParams& params, std::optional<std::uint32_t> entry) {
  const auto unit = fx.Unit();
  double sum = 0;
  for (const auto& q : queries) {
    cf::QueryTrace trace;
    const auto res = entry ? cf::PrivateSearch(*fx.client, q, *entry, params, trace)
                           : cf::PrivateSearch(*fx.client, q, params, trace);
    const auto truth = cf::ExactTopK(q, unit, fx.index.doc_ids, params.k);
    sum += cf::PrecisionRecallAtK(res.doc_ids, truth, params.k).recall;
  }
  return sum / static_cast<double>(queries.size());
}

}  // namespace

TEST_SUITE("knn graph") {
  TEST_CASE("three equally spaced points, degree 1") {
    cf::RowMatrixXf x(3, 2);
    x << 1, -1, 1, 0, 1, 1;
    const auto g = cf::BuildKnnGraph(x, 1);
    CHECK(g[0] == std::vector<std::uint32_t>{1});
    CHECK(g[1] == std::vector<std::uint32_t>{0});
    CHECK(g[2] == std::vector<std::uint32_t>{1});
  }

  TEST_CASE("degree N-1 is complete adjacency") {
    const auto x = cf::EmbeddingMatrix(cf::testing::RandomRecords(7, 3, 2));
    const auto g = cf::BuildKnnGraph(x, 6);
    for (std::uint32_t i = 0; i < 7; ++i) {
      std::set<std::uint32_t> s(g[i].begin(), g[i].end());
      CHECK(s.size() == 6);
      CHECK_FALSE(s.contains(i));
    }
  }

  TEST_CASE("200 random vectors, degree 16, match the brute-force oracle") {
    const auto x = cf::EmbeddingMatrix(cf::testing::RandomRecords(200, 12, 3));
    CHECK(cf::BuildKnnGraph(x, 16) == OracleKnn(x, 16));
  }

  TEST_CASE("invalid degree") {
    const auto x = cf::EmbeddingMatrix(cf::testing::RandomRecords(5, 3, 2));
    for (std::uint32_t deg : {0u, 5u, 9u}) {
      try {
        cf::BuildKnnGraph(x, deg);
        FAIL("expected InvalidDegree");
      } catch (const cf::Error& e) {
        CHECK(e.code() == cf::ErrorCode::kInvalidDegree);
      }
    }
  }
}

TEST_SUITE("node records") {
  TEST_CASE("encode then decode round trips ids, neighbors and quantized values") {
    const auto x = cf::EmbeddingMatrix(cf::testing::RandomRecords(30, 5, 4));
    const auto g = cf::BuildKnnGraph(x, 4);
    const float maxabs = cf::CorpusMaxAbs(x);
    const auto m = cf::EncodeNodeRecords(g, x, 4, maxabs);
    CHECK(m.n_cols() == 30);
    CHECK(m.m_rows() % m.chunk_size == 0);
    CHECK(m.m_rows() >= cf::NodeRecordSize(5, 4));
    CHECK(cf::NodeRecordSize(5, 4) == 8 + 5 + 16);
    for (std::uint32_t j = 0; j < 30; ++j) {
      const auto r = cf::DecodeNodeRecord(m.Column(j), 5, 4);
      CHECK(r.node_id == j);
      CHECK(r.neighbors == g[j]);
      std::vector<float> row(x.row(j).data(), x.row(j).data() + 5);
      CHECK(r.quantized == cf::QuantizeVector(row, maxabs));
    }
  }

  TEST_CASE("a zero vector encodes as offset-128 bytes") {
    cf::RowMatrixXf x(2, 3);
    x << 0, 0, 0, 1, 2, 3;
    const cf::Adjacency g = {{1}, {0}};
    const auto col = cf::EncodeNodeRecords(g, x, 1, 3.0f).Column(0);
    for (std::size_t i = 8; i < 11; ++i) CHECK(col[i] == 128);
    const auto col1 = cf::EncodeNodeRecords(g, x, 1, 3.0f).Column(1);
    CHECK(col1[8] == 128 + 42);
    CHECK(col1[10] == 128 + 127);
  }

  TEST_CASE("short neighbor lists are padded with the node's own id") {
    cf::RowMatrixXf x(2, 1);
    x << 1, 2;
    const cf::Adjacency g = {{1}, {}};
    const auto m = cf::EncodeNodeRecords(g, x, 3, 2.0f);
    CHECK(cf::DecodeNodeRecord(m.Column(0), 1, 3).neighbors == std::vector<std::uint32_t>{1, 0, 0});
    CHECK(cf::DecodeNodeRecord(m.Column(1), 1, 3).neighbors == std::vector<std::uint32_t>{1, 1, 1});
  }

  TEST_CASE("PIR fetch of column 5 returns node 5's record") {
    GraphFixture fx(200, 8);
    cf::QueryTrace trace;
    const auto got = fx.client->FetchColumn(cf::TargetMatrix::kNode, 5, trace);
    CHECK(got == fx.index.nodes->plain.Column(5));
    CHECK(cf::DecodeNodeRecord(got, fx.index.dim, 8).node_id == 5);
    CHECK(trace.pir_op_count == 1);
  }
}

TEST_SUITE("graph search") {
  TEST_CASE("query equal to the entry vector returns the entry first") {
    GraphFixture fx(300, 8);
    for (std::uint32_t entry : {0u, 17u, 299u}) {
      cf::SearchParams p;
      p.k = 1;
      p.hops = 2;
      p.beam = 2;
      cf::QueryTrace trace;
      const auto res = cf::PrivateSearch(*fx.client, fx.records[entry].embedding, entry, p, trace);
      REQUIRE(res.doc_ids.size() == 1);
      CHECK(res.doc_ids[0] == fx.records[entry].doc_id);
    }
  }

  TEST_CASE("operation count is hops x beam for every query") {
    GraphFixture fx(500, 16);
    cf::SearchParams p;
    p.hops = 4;
    p.beam = 8;
    const auto queries = cf::PerturbedQueries(fx.records, 20, 0.02, 5);
    std::set<std::uint64_t> downlinks;
    for (const auto& q : queries) {
      cf::QueryTrace trace;
      const auto before = fx.server->answer_count();
      const auto res = cf::PrivateSearch(*fx.client, q, p, trace);
      CHECK(trace.pir_op_count == 32);
      CHECK(res.fetched.size() == 32);
      CHECK(fx.server->answer_count() - before == 32);
      downlinks.insert(trace.downlink_bytes);
    }
    CHECK(downlinks.size() == 1);
    cf::QueryTrace trace;
    cf::PrivateSearch(*fx.client, queries[0], 3, p, trace);
    CHECK(trace.pir_op_count == 32);
  }

  TEST_CASE("traversal is deterministic") {
    GraphFixture fx(400, 8);
    const auto q = cf::PerturbedQueries(fx.records, 1, 0.02, 6)[0];
    cf::SearchParams p;
    cf::QueryTrace t1, t2;
    const auto a = cf::PrivateSearch(*fx.client, q, p, t1);
    const auto b = cf::PrivateSearch(*fx.client, q, p, t2);
    CHECK(a.fetched == b.fetched);
    CHECK(a.doc_ids == b.doc_ids);
    CHECK(a.scores == b.scores);
  }

  TEST_CASE("invalid inputs") {
    GraphFixture fx(100, 4);
    const auto& q = fx.records[0].embedding;
    cf::QueryTrace trace;
    cf::SearchParams p;
    try {
      cf::PrivateSearch(*fx.client, q, 100, p, trace);
      FAIL("expected InvalidEntryPoint");
    } catch (const cf::Error& e) {
      CHECK(e.code() == cf::ErrorCode::kInvalidEntryPoint);
    }
    p.hops = 0;
    CHECK_THROWS_AS(cf::PrivateSearch(*fx.client, q, p, trace), cf::Error);
    p.hops = 1;
    p.beam = 0;
    CHECK_THROWS_AS(cf::PrivateSearch(*fx.client, q, p, trace), cf::Error);
    const std::vector<float> short_q = {1, 2};
    p.beam = 1;
    CHECK_THROWS_AS(cf::PrivateSearch(*fx.client, short_q, p, trace), cf::Error);
  }

  TEST_CASE("2000 clustered docs, degree 16, hops 4, beam 8: recall@10 >= 0.8") {
    GraphFixture fx(2000, 16);
    const auto queries = cf::PerturbedQueries(fx.records, 100, 0.02, 2);
    cf::SearchParams p;
    p.hops = 4;
    p.beam = 8;
    const double recall = MeanRecall(fx, queries, p, std::nullopt);
    MESSAGE("recall@10 = " << recall);
    CHECK(recall >= 0.8);
  }

  TEST_CASE("recall varies by less than 0.1 across 5 random entry points") {
    GraphFixture fx(2000, 16);
    const auto queries = cf::PerturbedQueries(fx.records, 100, 0.02, 3);
    // Enough hops for a single entry to cross between blobs.
    cf::SearchParams p;
    p.hops = 16;
    std::mt19937_64 rng(8);
    std::vector<double> recalls;
    for (int i = 0; i < 5; ++i) {
      const auto entry = static_cast<std::uint32_t>(rng() % fx.index.n_docs());
      recalls.push_back(MeanRecall(fx, queries, p, entry));
    }
    const auto [lo, hi] = std::minmax_element(recalls.begin(), recalls.end());
    MESSAGE("single-entry recall range [" << *lo << ", " << *hi << "]");
    CHECK(*hi - *lo < 0.1);
  }
}

TEST_SUITE("doc fetch") {
  TEST_CASE("K=0 fetches nothing, K=3 costs three operations and round trips") {
    GraphFixture fx(150, 4);
    cf::QueryTrace trace;
    CHECK(fx.client->FetchDocs({}, trace).empty());
    CHECK(trace.pir_op_count == 0);
    const std::vector<std::uint64_t> ids = {fx.records[3].doc_id, fx.records[70].doc_id,
                                            fx.records[149].doc_id};
    const auto docs = fx.client->FetchDocs(ids, trace);
    CHECK(trace.pir_op_count == 3);
    REQUIRE(docs.size() == 3);
    CHECK(docs[0] == fx.records[3]);
    CHECK(docs[1] == fx.records[70]);
    CHECK(docs[2] == fx.records[149]);
  }

  TEST_CASE("padding brings the operation count to K and unknown ids fail") {
    GraphFixture fx(150, 4);
    cf::QueryTrace trace;
    const std::vector<std::uint64_t> ids = {fx.records[5].doc_id};
    CHECK(fx.client->FetchDocs(ids, trace, 10).size() == 1);
    CHECK(trace.pir_op_count == 10);
    const std::vector<std::uint64_t> bad = {123456789};
    try {
      fx.client->FetchDocs(bad, trace);
      FAIL("expected UnknownDocId");
    } catch (const cf::Error& e) {
      CHECK(e.code() == cf::ErrorCode::kUnknownDocId);
    }
  }
}

TEST_SUITE("quantization") {
  TEST_CASE("quantized top-1 agrees with float top-1 on >= 95% of queries at d = 128") {
    const std::size_t n = 1000, d = 128;
    const auto x = cf::EmbeddingMatrix(cf::testing::RandomRecords(n, d, 10));
    const float maxabs = cf::CorpusMaxAbs(x);
    std::vector<std::vector<float>> deq;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      std::vector<float> row(x.row(i).data(), x.row(i).data() + d);
      deq.push_back(cf::Dequantize(cf::QuantizeVector(row, maxabs), maxabs));
    }
    const auto queries = cf::EmbeddingMatrix(cf::testing::RandomRecords(200, d, 11));
    std::size_t agree = 0;
    for (Eigen::Index qi = 0; qi < queries.rows(); ++qi) {
      const float* q = queries.row(qi).data();
      std::size_t best_f = 0, best_q = 0;
      double sf = -2, sq = -2;
      for (std::size_t i = 0; i < n; ++i) {
        const double a = NaiveCosine(q, x.row(static_cast<Eigen::Index>(i)).data(), d);
        const double b = NaiveCosine(q, deq[i].data(), d);
        if (a > sf) sf = a, best_f = i;
        if (b > sq) sq = b, best_q = i;
      }
      agree += best_f == best_q;
    }
    MESSAGE("top-1 agreement " << agree << "/200");
    CHECK(agree >= 190);
  }
}
