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

#include "clusterfetch/client.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "clusterfetch/quantize.hpp"
#include "json.hpp"

namespace clusterfetch {
namespace {

using Clock = std::chrono::steady_clock;

double MsSince(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

Frame LoopbackTransport::RoundTrip(const Frame& request) {
  const Frame decoded = DecodeFrame(EncodeFrame(request));
  return DecodeFrame(EncodeFrame(server_.HandleMessage(decoded)));
}

TcpTransport::TcpTransport(const HostPort& server) : socket_(ConnectTcp(server)) {}

Frame TcpTransport::RoundTrip(const Frame& request) {
  WriteFrame(socket_.fd(), request);
  auto response = ReadFrame(socket_.fd());
  if (!response) throw Error(ErrorCode::kTransport, "server closed the connection");
  return std::move(*response);
}

std::string QueryTrace::ToJson() const {
  nlohmann::json j;
  j["system"] = system;
  j["uplink_bytes"] = uplink_bytes;
  j["downlink_bytes"] = downlink_bytes;
  j["setup_bytes"] = setup_bytes;
  j["pir_op_count"] = pir_op_count;
  j["route_ms"] = route_ms;
  j["encrypt_ms"] = encrypt_ms;
  j["server_ms"] = server_ms;
  j["decode_ms"] = decode_ms;
  j["rerank_ms"] = rerank_ms;
  j["total_ms"] = total_ms();
  j["doc_ids"] = doc_ids;
  return j.dump();
}

double Cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::uint32_t RouteQuery(std::span<const float> query, const RowMatrixXf& centroids) {
  if (static_cast<Eigen::Index>(query.size()) != centroids.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query has " + std::to_string(query.size()) + " dims, centroids have " +
                    std::to_string(centroids.cols()));
  }
  if (centroids.rows() == 0) throw Error(ErrorCode::kInvalidArgument, "no centroids");
  std::uint32_t best = 0;
  double best_score = -2;
  for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
    const double s = Cosine(query, {centroids.row(j).data(), query.size()});
    if (s > best_score) {
      best_score = s;
      best = static_cast<std::uint32_t>(j);
    }
  }
  return best;
}

std::vector<RankedResult> RerankTopK(std::span<const float> query,
                                     std::span<const EmbeddingRecord> docs, std::size_t k) {
  std::vector<RankedResult> all;
  all.reserve(docs.size());
  for (const auto& d : docs) {
    if (d.embedding.size() != query.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "doc " + std::to_string(d.doc_id) + " has " +
                      std::to_string(d.embedding.size()) + " dims, query has " +
                      std::to_string(query.size()));
    }
    all.push_back({d.doc_id, Cosine(query, d.embedding), d.text});
  }
  const std::size_t n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    [](const RankedResult& a, const RankedResult& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.doc_id < b.doc_id;
                    });
  all.resize(n);
  return all;
}

Client::Client(Transport& transport, const Seed& rng_seed)
    : transport_(transport), rng_(rng_seed) {}

Seed Client::NextSeed() {
  Seed s;
  rng_.Fill(s);
  return s;
}

Frame Client::Exchange(const Frame& request, QueryTrace& trace) {
  trace.uplink_bytes += WireSize(request);
  const auto t0 = Clock::now();
  Frame response = transport_.RoundTrip(request);
  trace.server_ms += MsSince(t0);
  trace.downlink_bytes += WireSize(response);
  return response;
}

void Client::Setup(std::uint8_t mask) {
  QueryTrace trace;
  const Frame response = Exchange(MakeFrame(MsgType::kSetupReq, Bytes{mask}), trace);
  ExpectType(response, MsgType::kSetupResp);
  setup_bytes_ = trace.uplink_bytes + trace.downlink_bytes;
  ByteReader r(response.payload, ErrorCode::kProtocol);
  setup_ = ReadPublicSetup(r);
  if (!r.done()) throw Error(ErrorCode::kProtocol, "trailing bytes in SETUP_RESP");

  auto make_db = [](PublicFetchDb& pub) {
    return WithWord(pub.params.cipher_mod_bits, [&]<class Word>(Word) {
      PirHint<Word> hint{std::move(std::get<Matrix<Word>>(pub.hint))};
      pub.hint = Matrix<Word>();
      Matrix<Word> a = ExpandMatrix<Word>(pub.params.seed, pub.cols, pub.params.lwe_dim);
      return Db{pub, std::move(a), std::move(hint)};
    });
  };
  clusters_.reset();
  docs_.reset();
  nodes_.reset();
  if (setup_.clusters) clusters_ = make_db(*setup_.clusters);
  if (setup_.docs) docs_ = make_db(*setup_.docs);
  if (setup_.nodes) nodes_ = make_db(*setup_.nodes);
  score_hints_.clear();
  if (setup_.score_params) {
    score_a_ = ExpandMatrix<std::uint64_t>(setup_.score_params->seed, setup_.dim,
                                           setup_.score_params->lwe_dim);
    for (auto& h : setup_.score_hints) score_hints_.push_back({std::move(h)});
    setup_.score_hints.clear();
  }
}

const Client::Db& Client::DbFor(TargetMatrix target) const {
  const std::optional<Db>* db = nullptr;
  switch (target) {
    case TargetMatrix::kCluster: db = &clusters_; break;
    case TargetMatrix::kDoc: db = &docs_; break;
    case TargetMatrix::kNode: db = &nodes_; break;
  }
  if (db == nullptr || !db->has_value()) {
    throw Error(ErrorCode::kInvalidArgument,
                "setup has no matrix for target " +
                    std::to_string(static_cast<int>(target)));
  }
  return **db;
}

Bytes Client::FetchColumn(TargetMatrix target, std::uint32_t column, QueryTrace& trace) {
  const Db& db = DbFor(target);
  if (column >= db.pub.cols) {
    throw Error(ErrorCode::kInvalidArgument, "column " + std::to_string(column) + " of " +
                                                 std::to_string(db.pub.cols));
  }
  return WithWord(db.pub.params.cipher_mod_bits, [&]<class Word>(Word) {
    auto t0 = Clock::now();
    const auto sk = KeyGen<Word>(db.pub.params, NextSeed());
    std::vector<std::uint64_t> selector(db.pub.cols, 0);
    selector[column] = 1;
    const auto query = EncryptVector<Word>(db.pub.params, sk, std::get<Matrix<Word>>(db.a),
                                           selector, NextSeed());
    const Frame request = MakePirQueryFrame(target, query);
    trace.encrypt_ms += MsSince(t0);

    const auto answer = ParsePirAnswer<Word>(Exchange(request, trace));
    ++trace.pir_op_count;

    t0 = Clock::now();
    const auto values =
        DecodeValues(answer, std::get<PirHint<Word>>(db.hint), sk, db.pub.params);
    Bytes out(values.begin(), values.end());
    trace.decode_ms += MsSince(t0);
    return out;
  });
}

std::vector<RankedResult> Client::Query(std::span<const float> query, std::size_t k,
                                        QueryTrace& trace) {
  auto t0 = Clock::now();
  const std::uint32_t cluster = RouteQuery(query, setup_.centroids);
  trace.route_ms += MsSince(t0);

  const Bytes stream = FetchCluster(cluster, trace);
  t0 = Clock::now();
  const auto docs = UnpackCluster(stream, setup_.dim);
  trace.decode_ms += MsSince(t0);

  t0 = Clock::now();
  auto results = RerankTopK(query, docs, k);
  trace.rerank_ms += MsSince(t0);
  trace.doc_ids.clear();
  for (const auto& r : results) trace.doc_ids.push_back(r.doc_id);
  return results;
}

std::vector<EmbeddingRecord> Client::FetchDocs(std::span<const std::uint64_t> doc_ids,
                                               QueryTrace& trace, std::size_t pad_to) {
  std::vector<std::uint32_t> columns;
  for (auto id : doc_ids) {
    const auto it = std::find(setup_.doc_ids.begin(), setup_.doc_ids.end(), id);
    if (it == setup_.doc_ids.end()) {
      throw Error(ErrorCode::kUnknownDocId, "doc_id " + std::to_string(id));
    }
    columns.push_back(static_cast<std::uint32_t>(it - setup_.doc_ids.begin()));
  }
  std::vector<EmbeddingRecord> out;
  for (auto col : columns) {
    const Bytes stream = FetchColumn(TargetMatrix::kDoc, col, trace);
    const auto t0 = Clock::now();
    auto docs = UnpackCluster(stream, setup_.dim);
    trace.decode_ms += MsSince(t0);
    if (docs.size() != 1) {
      throw Error(ErrorCode::kFraming, "doc column " + std::to_string(col) + " holds " +
                                           std::to_string(docs.size()) + " records");
    }
    out.push_back(std::move(docs.front()));
  }
  for (std::size_t i = columns.size(); i < pad_to && !columns.empty(); ++i) {
    FetchColumn(TargetMatrix::kDoc, columns.front(), trace);
  }
  return out;
}

std::vector<std::int64_t> Client::ScoreRows(std::uint32_t cluster,
                                            std::span<const float> query, QueryTrace& trace) {
  if (!setup_.score_params) throw Error(ErrorCode::kInvalidArgument, "setup has no scoring matrices");
  if (query.size() != setup_.dim) {
    throw Error(ErrorCode::kDimensionMismatch, "query has " + std::to_string(query.size()) +
                                                   " dims, index has " +
                                                   std::to_string(setup_.dim));
  }
  const LweParams& params = *setup_.score_params;
  auto t0 = Clock::now();
  const auto sk = KeyGen<std::uint64_t>(params, NextSeed());
  // Rows hold unit-norm embeddings; scale the query the same way.
  std::vector<float> unit(query.begin(), query.end());
  double norm = 0;
  for (float v : unit) norm += double(v) * v;
  if (norm > 0) {
    for (float& v : unit) v = static_cast<float>(v / std::sqrt(norm));
  }
  const auto plain = QuantizeEmbedding(unit, setup_.score_maxabs, params.plain_mod);
  const auto q = EncryptVector<std::uint64_t>(params, sk, score_a_, plain, NextSeed());
  const Frame request = MakeScoreQueryFrame(cluster, q);
  trace.encrypt_ms += MsSince(t0);

  const auto answer = ParseScoreAnswer(Exchange(request, trace));
  ++trace.pir_op_count;

  t0 = Clock::now();
  if (cluster >= score_hints_.size()) {
    throw Error(ErrorCode::kUnknownCluster, "cluster " + std::to_string(cluster));
  }
  const auto values = DecodeValues(answer, score_hints_[cluster], sk, params);
  std::vector<std::int64_t> scores;
  scores.reserve(values.size());
  for (auto v : values) scores.push_back(DecodeCentered(v, params.plain_mod));
  trace.decode_ms += MsSince(t0);
  return scores;
}

}  // namespace clusterfetch
