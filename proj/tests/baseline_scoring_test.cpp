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
#include <random>
#include <set>

#include "clusterfetch/private_scoring.hpp"
#include "clusterfetch/quantize.hpp"
#include "clusterfetch/scoring.hpp"
#include "clusterfetch/server.hpp"
#include "clusterfetch/synth.hpp"
#include "doctest.h"
#include "test_support.hpp"

namespace cf = clusterfetch;

namespace {

std::vector<float> Unit(std::vector<float> v) {
  double n = 0;
  for (float x : v) n += double(x) * x;
  for (float& x : v) x = static_cast<float>(x / std::sqrt(n));
  return v;
}

std::int64_t QuantDot(const std::vector<std::int8_t>& a, const std::vector<std::int8_t>& b) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::int64_t{a[i]} * b[i];
  return s;
}

struct ScoringFixture {
  std::vector<cf::EmbeddingRecord> records;
  cf::Index index;
  std::unique_ptr<cf::Server> server;
  std::unique_ptr<cf::LoopbackTransport> transport;
  std::unique_ptr<cf::Client> client;

  explicit ScoringFixture(std::vector<cf::EmbeddingRecord> recs, std::uint32_t k = 0,
                          std::uint8_t components = cf::kScoring)
      : records(std::move(recs)) {
    cf::IndexOptions opts;
    opts.k = k;
    opts.components = components;
    opts.seed = cf::SeedFromInt(5);
    index = cf::BuildIndex(records, opts);
    server = std::make_unique<cf::Server>(index);
    transport = std::make_unique<cf::LoopbackTransport>(*server);
    client = std::make_unique<cf::Client>(*transport, cf::SeedFromInt(6));
    client->Setup(components);
  }

  // Plaintext oracle: quantized unit query . quantized unit doc, per cluster member.
  std::vector<cf::ScoredDoc> Oracle(const std::vector<float>& query, std::uint32_t cluster) const {
    const float maxabs = index.scoring.maxabs;
    const auto qq = cf::QuantizeVector(Unit(query), maxabs);
    std::vector<cf::ScoredDoc> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (index.assignments[i] != cluster) continue;
      const auto dq = cf::QuantizeVector(Unit(records[i].embedding), maxabs);
      out.push_back({records[i].doc_id, QuantDot(qq, dq)});
    }
    return out;
  }
};

std::vector<cf::EmbeddingRecord> Synthetic(std::size_t n, std::size_t dim, std::uint64_t seed) {
  cf::SynthOptions so;
  so.n_docs = n;
  so.dim = dim;
  so.seed = seed;
  so.text_len = 8;
  return cf::GenSyntheticCorpus(so).records;
}

}  // namespace

TEST_SUITE("quantize") {
  TEST_CASE("zero vector, boundary and bound") {
    const std::vector<float> zero(5, 0.0f);
    CHECK(cf::QuantizeVector(zero, 1.0f) == std::vector<std::int8_t>(5, 0));
    CHECK(cf::QuantizeEmbedding(zero, 1.0f) == std::vector<std::uint64_t>(5, 0));
    CHECK(cf::QuantizeValue(0.5f, 0.5f) == 127);
    CHECK(cf::QuantizeValue(-0.5f, 0.5f) == -127);
    CHECK(cf::QuantizeValue(3.0f, 0.5f) == 127);
    const std::vector<float> neg = {-1.0f};
    CHECK(cf::QuantizeEmbedding(neg, 1.0f)[0] == cf::kScoringPlainMod - 127);
    CHECK(cf::DecodeCentered(cf::kScoringPlainMod - 127, cf::kScoringPlainMod) == -127);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> u(-2.0f, 2.0f);
    for (int t = 0; t < 1000; ++t) {
      const float maxabs = 2.0f;
      std::vector<float> v(16);
      for (auto& x : v) x = u(rng);
      const auto back = cf::Dequantize(cf::QuantizeVector(v, maxabs), maxabs);
      for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(std::abs(back[i] - v[i]) <= maxabs / 127 + 1e-6f);
      }
    }
  }

  TEST_CASE("non-finite input and bad maxabs") {
    const std::vector<float> v = {1.0f, std::numeric_limits<float>::infinity()};
    try {
      cf::QuantizeEmbedding(v, 1.0f);
      FAIL("expected NonFiniteInput");
    } catch (const cf::Error& e) {
      CHECK(e.code() == cf::ErrorCode::kNonFiniteInput);
    }
    CHECK_THROWS_AS(cf::QuantizeValue(1.0f, 0.0f), cf::Error);
  }
}

TEST_SUITE("embedding matrices") {
  TEST_CASE("a one-doc cluster in capacity 4 has three zero rows") {
    cf::ClusterModel model;
    model.centroids = cf::RowMatrixXf::Zero(2, 2);
    model.assignments = {0, 1, 1, 1, 1};
    cf::RowMatrixXf x(5, 2);
    x << 1, 0, 0, 1, 0.5, 0.5, -1, 0, 0, -1;
    const std::vector<std::uint64_t> ids = {10, 11, 12, 13, 14};
    const auto db = cf::BuildEmbeddingMatrices(model, x, ids, 1.0f);
    CHECK(db.capacity == 4);
    REQUIRE(db.matrices.size() == 2);
    CHECK(db.matrices[0](0, 0) == 127);
    CHECK(db.matrices[0].bottomRows(3).isZero());
    CHECK(db.row_doc_ids[0] == std::vector<std::uint64_t>{10, cf::kPaddingRow, cf::kPaddingRow,
                                                          cf::kPaddingRow});
    CHECK(db.row_doc_ids[1] == std::vector<std::uint64_t>{11, 12, 13, 14});
  }

  TEST_CASE("an empty cluster is an all-zero matrix") {
    cf::ClusterModel model;
    model.centroids = cf::RowMatrixXf::Zero(3, 2);
    model.assignments = {0, 0, 2};
    cf::RowMatrixXf x(3, 2);
    x << 1, 0, 0, 1, 1, 1;
    const std::vector<std::uint64_t> ids = {1, 2, 3};
    const auto db = cf::BuildEmbeddingMatrices(model, x, ids, 1.0f);
    CHECK(db.matrices[1].isZero());
    CHECK(db.row_doc_ids[1] == std::vector<std::uint64_t>(2, cf::kPaddingRow));
  }

  TEST_CASE("matrix times quantized query equals the naive dot products") {
    const auto records = cf::testing::RandomRecords(60, 9, 2);
    cf::RowMatrixXf x = cf::EmbeddingMatrix(records);
    x.rowwise().normalize();
    cf::ClusterModel model = cf::KMeansFit(x, 4);
    std::vector<std::uint64_t> ids;
    for (const auto& r : records) ids.push_back(r.doc_id);
    const float maxabs = cf::CorpusMaxAbs(x);
    const auto db = cf::BuildEmbeddingMatrices(model, x, ids, maxabs);
    const auto q = cf::QuantizeVector(Unit(cf::testing::RandomRecords(1, 9, 3)[0].embedding), maxabs);
    Eigen::VectorXi qv(9);
    for (int i = 0; i < 9; ++i) qv[i] = q[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < db.matrices.size(); ++j) {
      const Eigen::VectorXi prod = db.matrices[j].cast<int>() * qv;
      for (std::size_t r = 0; r < db.capacity; ++r) {
        const auto id = db.row_doc_ids[j][r];
        if (id == cf::kPaddingRow) {
          CHECK(prod[static_cast<Eigen::Index>(r)] == 0);
          continue;
        }
        const auto pos = static_cast<Eigen::Index>(id - ids.front());
        std::vector<float> row(x.row(pos).data(), x.row(pos).data() + 9);
        CHECK(prod[static_cast<Eigen::Index>(r)] == QuantDot(q, cf::QuantizeVector(row, maxabs)));
      }
    }
  }
}

TEST_SUITE("private score") {
  TEST_CASE("scores equal the plaintext oracle exactly over 100 queries") {
    ScoringFixture fx(Synthetic(400, 16, 2));
    const auto queries = cf::PerturbedQueries(fx.records, 100, 0.05, 4);
    for (const auto& q : queries) {
      const auto cluster = cf::RouteQuery(q, fx.index.centroids);
      cf::QueryTrace trace;
      auto got = cf::PrivateScore(*fx.client, q, cluster, trace);
      CHECK(got == fx.Oracle(q, cluster));
      CHECK(trace.pir_op_count == 1);
    }
  }

  TEST_CASE("a doc's own embedding reaches the maximal score sum q_i^2") {
    ScoringFixture fx(Synthetic(300, 16, 7));
    for (std::size_t i : {0u, 50u, 299u}) {
      const auto& q = fx.records[i].embedding;
      const auto cluster = fx.index.assignments[i];
      cf::QueryTrace trace;
      const auto scores = cf::PrivateScore(*fx.client, q, cluster, trace);
      const auto qq = cf::QuantizeVector(Unit(q), fx.index.scoring.maxabs);
      const auto self = std::find_if(scores.begin(), scores.end(),
                                     [&](const auto& s) { return s.doc_id == fx.records[i].doc_id; });
      REQUIRE(self != scores.end());
      CHECK(self->score == QuantDot(qq, qq));
      for (const auto& s : scores) CHECK(s.score <= self->score);
    }
  }

  TEST_CASE("orthogonal query against an axis-aligned doc scores 0") {
    std::vector<cf::EmbeddingRecord> recs = {{1, {1, 0, 0, 0}, "a"}, {2, {0, 1, 0, 0}, "b"},
                                             {3, {0.6f, 0.8f, 0, 0}, "c"}};
    ScoringFixture fx(recs, 1);
    const std::vector<float> q = {0, 0, 1, 0};
    cf::QueryTrace trace;
    for (const auto& s : cf::PrivateScore(*fx.client, q, 0, trace)) CHECK(s.score == 0);
    const std::vector<float> q2 = {0, 1, 0, 0};
    const auto scores = cf::PrivateScore(*fx.client, q2, 0, trace);
    CHECK(scores[0] == cf::ScoredDoc{1, 0});
    CHECK(scores[1] == cf::ScoredDoc{2, 127 * 127});
  }

  TEST_CASE("answers have the same length for every cluster and bad clusters fail") {
    ScoringFixture fx(Synthetic(200, 8, 3), 6);
    std::set<std::uint64_t> downlinks;
    for (std::uint32_t j = 0; j < 6; ++j) {
      cf::QueryTrace trace;
      cf::PrivateScore(*fx.client, fx.records[0].embedding, j, trace);
      downlinks.insert(trace.downlink_bytes);
    }
    CHECK(downlinks.size() == 1);
    cf::QueryTrace trace;
    try {
      cf::PrivateScore(*fx.client, fx.records[0].embedding, 6, trace);
      FAIL("expected UnknownCluster");
    } catch (const cf::Error& e) {
      CHECK(e.code() == cf::ErrorCode::kUnknownCluster);
    }
  }

  TEST_CASE("top-K plus content costs 1 + K operations") {
    ScoringFixture fx(Synthetic(300, 16, 9), 0, cf::kScoring | cf::kDocFetch);
    const auto q = cf::PerturbedQueries(fx.records, 1, 0.02, 1)[0];
    cf::QueryTrace trace;
    const auto ids = cf::PrivateScoreTopK(*fx.client, q, 10, trace);
    CHECK(ids.size() == 10);
    CHECK(trace.pir_op_count == 1);
    const auto docs = fx.client->FetchDocs(ids, trace, 10);
    CHECK(trace.pir_op_count == 11);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      CHECK(docs[i].doc_id == ids[i]);
      CHECK(docs[i] == fx.records[ids[i] - fx.records.front().doc_id]);
    }
  }
}

TEST_SUITE("select top-k") {
  TEST_CASE("argmax, tie rule and padding") {
    const std::vector<cf::ScoredDoc> s = {{1, 5}, {2, 9}, {3, -1}};
    CHECK(cf::SelectTopKIds(s, 1) == std::vector<std::uint64_t>{2});
    const std::vector<cf::ScoredDoc> tie = {{9, 3}, {4, 3}, {7, 1}};
    CHECK(cf::SelectTopKIds(tie, 2) == std::vector<std::uint64_t>{4, 9});
    const std::vector<cf::ScoredDoc> pad = {{cf::kPaddingRow, 0}, {5, -3}};
    CHECK(cf::SelectTopKIds(pad, 2) == std::vector<std::uint64_t>{5});
  }

  TEST_CASE("matches a sort oracle on 1000 random lists") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 1000; ++t) {
      const std::size_t n = 1 + rng() % 40;
      std::vector<cf::ScoredDoc> s;
      std::set<std::uint64_t> used;
      while (s.size() < n) {
        const std::uint64_t id = rng() % 200;
        if (used.insert(id).second) s.push_back({id, static_cast<std::int64_t>(rng() % 11) - 5});
      }
      const std::size_t k = 1 + rng() % 15;
      auto oracle = s;
      std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
        return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
      });
      std::vector<std::uint64_t> expect;
      for (std::size_t i = 0; i < std::min(k, n); ++i) expect.push_back(oracle[i].doc_id);
      CHECK(cf::SelectTopKIds(s, k) == expect);
    }
  }
}
