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
#include <thread>

#include "clusterfetch/client.hpp"
#include "clusterfetch/packing.hpp"
#include "clusterfetch/server.hpp"
#include "clusterfetch/synth.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"

namespace cf = clusterfetch;
using cf::testing::RandomRecords;

namespace {

std::vector<float> Row(const cf::RowMatrixXf& m, Eigen::Index i) {
  return {m.row(i).data(), m.row(i).data() + m.cols()};
}

cf::RowMatrixXf RandomUnitRows(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal;
  cf::RowMatrixXf m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  m.rowwise().normalize();
  return m;
}

double NaiveCosine(const std::vector<float>& a, const std::vector<float>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += double(a[i]) * b[i];
    aa += double(a[i]) * a[i];
    bb += double(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

cf::Index SmallIndex(std::size_t n, std::uint32_t k, std::uint8_t components,
                     std::vector<cf::EmbeddingRecord>* records_out = nullptr) {
  cf::SynthOptions so;
  so.n_docs = n;
  so.dim = 8;
  so.n_blobs = 6;
  so.text_len = 16;
  auto corpus = cf::GenSyntheticCorpus(so);
  cf::IndexOptions opts;
  opts.k = k;
  opts.chunk_size = 64;
  opts.components = components;
  opts.seed = cf::SeedFromInt(11);
  auto index = cf::BuildIndex(corpus.records, opts);
  if (records_out) *records_out = std::move(corpus.records);
  return index;
}

std::uint16_t ErrorCodeOf(const cf::Frame& f) {
  REQUIRE(f.type() == cf::MsgType::kError);
  return cf::ParseErrorFrame(f).code;
}

// A 1 x 1 byte matrix holding [[value]] under the cluster target.
cf::Index SingleEntryIndex(std::uint8_t value) {
  cf::Index index;
  index.components = cf::kClusterFetch;
  index.dim = 1;
  index.chunk_size = 1;
  index.centroids = cf::RowMatrixXf::Ones(1, 1);
  cf::FetchDatabase db;
  db.params = cf::DeriveParams(1, 256, cf::Profile::kFetch, cf::SeedFromInt(3));
  db.plain.chunk_size = 1;
  db.plain.entries = cf::ByteMatrix::Constant(1, 1, value);
  db.hint = cf::ComputeByteHint(db.params, db.plain.entries);
  index.clusters = std::move(db);
  return index;
}

}  // namespace

TEST_SUITE("route") {
  TEST_CASE("a query equal to centroid 3 routes to 3") {
    const auto c = RandomUnitRows(6, 5, 1);
    CHECK(cf::RouteQuery(Row(c, 3), c) == 3);
  }

  TEST_CASE("a mirror-symmetric query ties to the smaller index") {
    cf::RowMatrixXf c(2, 2);
    c << 1, 0, 0, 1;
    const std::vector<float> q = {1, 1};
    CHECK(cf::RouteQuery(q, c) == 0);
  }

  TEST_CASE("matches an exhaustive scan") {
    const auto c = RandomUnitRows(20, 12, 2);
    const auto queries = RandomUnitRows(100, 12, 3);
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
      const auto q = Row(queries, i);
      std::uint32_t best = 0;
      double best_score = -2;
      for (Eigen::Index j = 0; j < c.rows(); ++j) {
        const double s = NaiveCosine(q, Row(c, j));
        if (s > best_score) {
          best_score = s;
          best = static_cast<std::uint32_t>(j);
        }
      }
      CHECK(cf::RouteQuery(q, c) == best);
    }
  }

  TEST_CASE("dimension mismatch") {
    const auto c = RandomUnitRows(3, 4, 1);
    const std::vector<float> q = {1, 2, 3};
    try {
      cf::RouteQuery(q, c);
      FAIL("expected DimensionMismatch");
    } catch (const cf::Error& e) {
      CHECK(e.code() == cf::ErrorCode::kDimensionMismatch);
    }
  }
}

TEST_SUITE("rerank") {
  TEST_CASE("an exact copy of the query ranks first with score 1") {
    auto docs = RandomRecords(10, 6, 4);
    const auto q = docs[7].embedding;
    const auto r = cf::RerankTopK(q, docs, 3);
    REQUIRE(r.size() == 3);
    CHECK(r[0].doc_id == docs[7].doc_id);
    CHECK(r[0].score == doctest::Approx(1.0));
    CHECK(r[0].text == docs[7].text);
  }

  TEST_CASE("K larger than the cluster returns every doc") {
    const auto docs = RandomRecords(4, 3, 5);
    CHECK(cf::RerankTopK(docs[0].embedding, docs, 10).size() == 4);
    CHECK(cf::RerankTopK(docs[0].embedding, {}, 10).empty());
  }

  TEST_CASE("ties are broken by ascending doc id") {
    std::vector<cf::EmbeddingRecord> docs = {{9, {1, 0}, ""}, {4, {2, 0}, ""}, {6, {0, 1}, ""}};
    const std::vector<float> q = {1, 0};
    const auto r = cf::RerankTopK(q, docs, 3);
    CHECK(r[0].doc_id == 4);
    CHECK(r[1].doc_id == 9);
    CHECK(r[2].doc_id == 6);
  }

  TEST_CASE("matches an exhaustive sort") {
    const auto docs = RandomRecords(50, 8, 6);
    const auto q = RandomRecords(1, 8, 7)[0].embedding;
    std::vector<std::pair<double, std::uint64_t>> oracle;
    for (const auto& d : docs) oracle.emplace_back(-NaiveCosine(q, d.embedding), d.doc_id);
    std::sort(oracle.begin(), oracle.end());
    const auto r = cf::RerankTopK(q, docs, 10);
    REQUIRE(r.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(r[i].doc_id == oracle[i].second);
      CHECK(r[i].score == doctest::Approx(-oracle[i].first).epsilon(1e-9));
    }
  }
}

TEST_SUITE("fetch") {
  TEST_CASE("two-cluster index: fetched streams equal the packed streams") {
    std::vector<cf::EmbeddingRecord> records;
    const auto index = SmallIndex(40, 2, cf::kClusterFetch, &records);
    cf::Server server(index);
    cf::LoopbackTransport transport(server);
    cf::Client client(transport, cf::SeedFromInt(1));
    client.Setup(cf::kClusterFetch);
    for (std::uint32_t j = 0; j < 2; ++j) {
      std::vector<cf::EmbeddingRecord> members;
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (index.assignments[i] == j) members.push_back(records[i]);
      }
      const auto expect = cf::PackClusterBytes(members, index.chunk_size,
                                               index.clusters->plain.chunks_per_column());
      cf::QueryTrace trace;
      const auto before = server.answer_count();
      CHECK(client.FetchCluster(j, trace) == expect);
      CHECK(trace.pir_op_count == 1);
      CHECK(server.answer_count() == before + 1);

      const std::size_t word = index.clusters->params.cipher_mod_bits / 8;
      const std::size_t n = index.k();
      const std::size_t m = index.clusters->plain.m_rows();
      CHECK(trace.uplink_bytes == 5 + 1 + 4 + n * word);
      CHECK(trace.downlink_bytes == 5 + 4 + m * word);
    }
  }

  TEST_CASE("setup bytes equal the framed request and response sizes") {
    const auto index = SmallIndex(60, 3, cf::kAllComponents);
    cf::Server server(index);
    cf::LoopbackTransport transport(server);
    for (std::uint8_t mask : {std::uint8_t(cf::kClusterFetch), std::uint8_t(cf::kAllComponents)}) {
      cf::Client client(transport, cf::SeedFromInt(2));
      client.Setup(mask);
      cf::ByteWriter w;
      cf::WritePublicSetup(w, index, mask);
      CHECK(client.setup_bytes() == (5 + 1) + (5 + w.size()));
    }
  }

  TEST_CASE("a fetch against a missing database fails cleanly") {
    const auto index = SmallIndex(30, 2, cf::kClusterFetch);
    cf::Server server(index);
    cf::LoopbackTransport transport(server);
    cf::Client client(transport);
    client.Setup();
    cf::QueryTrace trace;
    CHECK_THROWS_AS(client.FetchColumn(cf::TargetMatrix::kDoc, 0, trace), cf::Error);
  }
}

TEST_SUITE("handle_message") {
  TEST_CASE("1 x 1 matrix [[7]] with selector e_0 decodes to 7") {
    const auto index = SingleEntryIndex(7);
    cf::Server server(index);
    cf::LoopbackTransport transport(server);
    cf::Client client(transport, cf::SeedFromInt(5));
    client.Setup();
    cf::QueryTrace trace;
    CHECK(client.FetchCluster(0, trace) == cf::Bytes{7});
  }

  TEST_CASE("PIR_QUERY with a wrong vector length is error 3") {
    const auto index = SingleEntryIndex(7);
    cf::Server server(index);
    cf::PirQuery<std::uint32_t> q;
    q.entries = cf::Vector<std::uint32_t>::Zero(2);
    q.profile = cf::Profile::kFetch;
    const auto out = server.HandleMessage(cf::MakePirQueryFrame(cf::TargetMatrix::kCluster, q));
    CHECK(ErrorCodeOf(out) == 3);
  }

  TEST_CASE("unknown message type 0x50 is error 1") {
    const auto index = SingleEntryIndex(7);
    cf::Server server(index);
    CHECK(ErrorCodeOf(server.HandleMessage(cf::Frame{0x50, {}})) == 1);
    CHECK(ErrorCodeOf(server.HandleMessage(cf::Frame{0x02, {}})) == 1);
  }

  TEST_CASE("malformed requests become error frames") {
    const auto index = SmallIndex(30, 2, cf::kAllComponents);
    cf::Server server(index);
    CHECK(ErrorCodeOf(server.HandleMessage(cf::MakeFrame(cf::MsgType::kPirQuery, {}))) ==
          static_cast<std::uint16_t>(cf::ErrorCode::kProtocol));
    CHECK(ErrorCodeOf(server.HandleMessage(cf::MakeFrame(cf::MsgType::kPirQuery, {9, 0, 0, 0, 0}))) ==
          static_cast<std::uint16_t>(cf::ErrorCode::kProtocol));
    CHECK(ErrorCodeOf(server.HandleMessage(cf::MakeFrame(cf::MsgType::kSetupReq, {1, 2}))) ==
          static_cast<std::uint16_t>(cf::ErrorCode::kProtocol));
    cf::PirQuery<std::uint64_t> q;
    q.entries = cf::Vector<std::uint64_t>::Zero(8);
    q.profile = cf::Profile::kScoring;
    CHECK(ErrorCodeOf(server.HandleMessage(cf::MakeScoreQueryFrame(99, q))) ==
          static_cast<std::uint16_t>(cf::ErrorCode::kUnknownCluster));
  }

  TEST_CASE("PIR_ANSWER length is the same for every selector") {
    const auto index = SmallIndex(80, 5, cf::kClusterFetch);
    cf::Server server(index);
    cf::LoopbackTransport transport(server);
    cf::Client client(transport, cf::SeedFromInt(3));
    client.Setup();
    std::set<std::uint64_t> sizes;
    for (std::uint32_t j = 0; j < index.k(); ++j) {
      cf::QueryTrace trace;
      client.FetchCluster(j, trace);
      sizes.insert(trace.downlink_bytes);
    }
    CHECK(sizes.size() == 1);
  }

  TEST_CASE("random frames never escape the handler") {
    const auto index = SmallIndex(30, 2, cf::kAllComponents);
    cf::Server server(index);
    std::mt19937_64 rng(12);
    for (int i = 0; i < 2000; ++i) {
      cf::Frame f;
      f.msg_type = static_cast<std::uint8_t>(i % 3 == 0 ? rng() : 1 + rng() % 6);
      f.payload.resize(rng() % 64);
      for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
      cf::Frame out;
      CHECK_NOTHROW(out = server.HandleMessage(f));
      CHECK((out.type() == cf::MsgType::kError || out.type() == cf::MsgType::kSetupResp));
    }
  }

  TEST_CASE("frame codec round trip and rejection") {
    const cf::Frame f{0x03, {1, 2, 3}};
    const auto bytes = cf::EncodeFrame(f);
    CHECK(bytes == cf::Bytes{4, 0, 0, 0, 3, 1, 2, 3});
    CHECK(cf::WireSize(f) == bytes.size());
    CHECK(cf::DecodeFrame(bytes) == f);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 2000; ++i) {
      cf::Bytes junk(rng() % 16);
      for (auto& b : junk) b = static_cast<std::uint8_t>(rng());
      try {
        const auto g = cf::DecodeFrame(junk);
        CHECK(cf::EncodeFrame(g) == junk);
      } catch (const cf::Error&) {
      }
    }
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("private query equals the plaintext pipeline") {
    std::vector<cf::EmbeddingRecord> records;
    const auto index = SmallIndex(300, 0, cf::kClusterFetch, &records);
    cf::Server server(index);
    cf::LoopbackTransport transport(server);
    cf::Client client(transport, cf::SeedFromInt(6));
    client.Setup();
    const auto queries = cf::PerturbedQueries(records, 25, 0.02, 9);
    for (const auto& q : queries) {
      cf::QueryTrace trace;
      const auto got = client.Query(q, 10, trace);
      const auto j = cf::RouteQuery(q, index.centroids);
      const auto docs = cf::UnpackCluster(index.clusters->plain.Column(j), index.dim);
      CHECK(got == cf::RerankTopK(q, docs, 10));
      CHECK(trace.pir_op_count == 1);
      CHECK(trace.doc_ids.size() == got.size());
    }
  }

  TEST_CASE("trace serializes as a flat JSON object") {
    cf::QueryTrace t;
    t.system = "cluster-fetch";
    t.uplink_bytes = 10;
    t.downlink_bytes = 20;
    t.setup_bytes = 30;
    t.pir_op_count = 1;
    t.route_ms = 1.5;
    t.doc_ids = {3, 4};
    const auto j = nlohmann::json::parse(t.ToJson());
    CHECK(j.is_object());
    CHECK(j["system"] == "cluster-fetch");
    CHECK(j["uplink_bytes"] == 10);
    CHECK(j["downlink_bytes"] == 20);
    CHECK(j["setup_bytes"] == 30);
    CHECK(j["pir_op_count"] == 1);
    CHECK(j["route_ms"].get<double>() == 1.5);
    CHECK(j["doc_ids"] == nlohmann::json::array({3, 4}));
    for (const char* key : {"encrypt_ms", "server_ms", "decode_ms", "rerank_ms", "total_ms"}) {
      CHECK(j.contains(key));
    }
  }
}

TEST_SUITE("tcp") {
  TEST_CASE("concurrent clients over TCP get the loopback results") {
    std::vector<cf::EmbeddingRecord> records;
    const auto index = SmallIndex(120, 4, cf::kClusterFetch, &records);
    cf::Server server(index);
    cf::TcpServer tcp(server, {"127.0.0.1", 0});
    tcp.Start();
    const auto queries = cf::PerturbedQueries(records, 12, 0.02, 3);
    std::vector<std::vector<std::vector<cf::RankedResult>>> results(3);
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < results.size(); ++t) {
      threads.emplace_back([&, t] {
        cf::TcpTransport transport({"127.0.0.1", tcp.port()});
        cf::Client client(transport, cf::SeedFromInt(t));
        client.Setup();
        for (const auto& q : queries) {
          cf::QueryTrace trace;
          results[t].push_back(client.Query(q, 5, trace));
        }
      });
    }
    for (auto& th : threads) th.join();

    cf::LoopbackTransport loop(server);
    cf::Client reference(loop, cf::SeedFromInt(99));
    reference.Setup();
    for (std::size_t i = 0; i < queries.size(); ++i) {
      cf::QueryTrace trace;
      const auto expect = reference.Query(queries[i], 5, trace);
      for (const auto& r : results) CHECK(r.at(i) == expect);
    }

    cf::TcpTransport raw({"127.0.0.1", tcp.port()});
    const auto reply = raw.RoundTrip(cf::Frame{0x50, {}});
    CHECK(ErrorCodeOf(reply) == 1);
    tcp.Stop();
  }

  TEST_CASE("connecting to a closed port is a transport error") {
    std::uint16_t port = 0;
    {
      auto s = cf::ListenTcp({"127.0.0.1", 0});
      port = cf::LocalPort(s);
    }
    try {
      cf::TcpTransport t({"127.0.0.1", port});
      t.RoundTrip(cf::MakeFrame(cf::MsgType::kSetupReq));
      FAIL("expected TransportError");
    } catch (const cf::Error& e) {
      CHECK(e.code() == cf::ErrorCode::kTransport);
    }
  }
}
