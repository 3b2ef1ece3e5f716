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

#include "clusterfetch/index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include "clusterfetch/quantize.hpp"

namespace clusterfetch {
namespace {

template <class T>
bool SameMatrices(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!SameMatrix(a[i], b[i])) return false;
  }
  return true;
}

void WriteAnyMatrix(ByteWriter& w, const AnyMatrix& m) {
  std::visit([&w](const auto& x) { WriteMatrix(w, x); }, m);
}

AnyMatrix ReadAnyMatrix(ByteReader& r, const LweParams& params) {
  return WithWord(params.cipher_mod_bits,
                  [&r]<class Word>(Word) -> AnyMatrix { return ReadMatrix<Word>(r); });
}

[[noreturn]] void Inconsistent(const std::string& what) {
  throw Error(ErrorCode::kParse, "inconsistent index data: " + what);
}

void CheckHintShape(const AnyMatrix& hint, std::uint32_t rows, const LweParams& params,
                    const char* name) {
  std::visit(
      [&](const auto& h) {
        if (h.rows() != rows || h.cols() != params.lwe_dim) {
          Inconsistent(std::string(name) + " hint shape");
        }
      },
      hint);
}

PublicFetchDb ReadFetchDb(ByteReader& r) {
  PublicFetchDb db;
  db.params = ReadParams(r);
  db.rows = r.get<std::uint32_t>();
  db.cols = r.get<std::uint32_t>();
  return db;
}

void WriteFetchHeader(ByteWriter& w, const FetchDatabase& db) {
  WriteParams(w, db.params);
  w.put(static_cast<std::uint32_t>(db.plain.m_rows()));
  w.put(static_cast<std::uint32_t>(db.plain.n_cols()));
}

FetchDatabase MakeFetchDatabase(const LweParams& params, ChunkMatrix plain) {
  FetchDatabase db{params, std::move(plain), {}};
  db.hint = ComputeByteHint(params, db.plain.entries);
  return db;
}

}  // namespace

bool Index::operator==(const Index& o) const {
  return components == o.components && dim == o.dim && chunk_size == o.chunk_size &&
         doc_ids == o.doc_ids && SameMatrix(centroids, o.centroids) &&
         assignments == o.assignments && clusters == o.clusters && docs == o.docs &&
         nodes == o.nodes && graph == o.graph && score_params == o.score_params &&
         scoring == o.scoring && SameMatrices(score_hints, o.score_hints);
}

AnyMatrix ComputeByteHint(const LweParams& params, const ByteMatrix& plain) {
  return WithWord(params.cipher_mod_bits, [&]<class Word>(Word) -> AnyMatrix {
    const Matrix<Word> a =
        ExpandMatrix<Word>(params.seed, plain.cols(), params.lwe_dim);
    return ComputeHint(LiftPlaintext<Word>(plain, params), a).h;
  });
}

Index BuildIndex(std::span<const EmbeddingRecord> records, const IndexOptions& options) {
  if (records.empty()) throw Error(ErrorCode::kInvalidArgument, "empty corpus");
  if (options.chunk_size == 0) throw Error(ErrorCode::kInvalidArgument, "chunk_size must be >= 1");
  Index index;
  index.components = options.components;
  index.chunk_size = options.chunk_size;
  index.dim = static_cast<std::uint32_t>(records.front().embedding.size());
  for (const auto& r : records) index.doc_ids.push_back(r.doc_id);

  RowMatrixXf unit = EmbeddingMatrix(records);
  NormalizeRows(unit);
  const std::uint32_t k = options.k != 0 ? options.k : DefaultClusterCount(records.size());
  KMeansOptions km;
  km.max_iters = options.kmeans_iters;
  km.tol = options.kmeans_tol;
  km.seed = DeriveSeed(options.seed, "kmeans");
  ClusterModel model = KMeansFit(unit, k, km);
  index.centroids = model.centroids;
  index.assignments = model.assignments;
  const auto members = model.Members();

  if (options.components & kClusterFetch) {
    std::vector<std::vector<EmbeddingRecord>> groups(k);
    std::size_t longest = 0;
    for (std::uint32_t j = 0; j < k; ++j) {
      for (auto i : members[j]) groups[j].push_back(records[i]);
      longest = std::max(longest, FramedSize(groups[j]));
    }
    const std::size_t chunks = CeilDiv(longest, options.chunk_size);
    std::vector<Bytes> streams;
    streams.reserve(k);
    for (const auto& g : groups) streams.push_back(PackClusterBytes(g, options.chunk_size, chunks));
    index.clusters = MakeFetchDatabase(
        DeriveParams(k, 256, Profile::kFetch, DeriveSeed(options.seed, "public-cluster")),
        BuildChunkMatrix(streams, options.chunk_size));
  }
  if (options.components & kDocFetch) {
    index.docs = MakeFetchDatabase(
        DeriveByteFetchParams(records.size(), DeriveSeed(options.seed, "public-doc")),
        BuildDocMatrix(records, options.chunk_size).matrix);
  }
  const float maxabs = CorpusMaxAbs(unit);
  if (options.components & kGraphNodes) {
    const Adjacency adj = BuildKnnGraph(unit, options.degree);
    index.graph.degree = options.degree;
    index.graph.maxabs = maxabs;
    index.graph.medoid = Medoid(unit);
    index.graph.representatives = ClusterRepresentatives(unit, model);
    index.nodes = MakeFetchDatabase(
        DeriveByteFetchParams(records.size(), DeriveSeed(options.seed, "public-node")),
        EncodeNodeRecords(adj, unit, options.degree, maxabs));
  }
  if (options.components & kScoring) {
    index.score_params = DeriveParams(index.dim, kScoringPlainMod, Profile::kScoring,
                                      DeriveSeed(options.seed, "public-score"));
    index.scoring = BuildEmbeddingMatrices(model, unit, index.doc_ids, maxabs);
    const Matrix<std::uint64_t> a = ExpandMatrix<std::uint64_t>(
        index.score_params->seed, index.dim, index.score_params->lwe_dim);
    for (const auto& m : index.scoring.matrices) {
      index.score_hints.push_back(
          ComputeHint(LiftPlaintext<std::uint64_t>(m, *index.score_params), a).h);
    }
  }
  return index;
}

void WritePublicSetup(ByteWriter& w, const Index& index, std::uint8_t mask) {
  std::uint8_t present = 0;
  if (index.clusters) present |= kClusterFetch;
  if (index.docs) present |= kDocFetch;
  if (index.nodes) present |= kGraphNodes;
  if (index.score_params) present |= kScoring;
  const std::uint8_t comps = present & mask;

  w.put(comps);
  w.put(index.dim);
  w.put(index.chunk_size);
  w.put(static_cast<std::uint64_t>(index.n_docs()));
  w.put(index.k());
  w.put_span(std::span<const float>(index.centroids.data(),
                                    static_cast<std::size_t>(index.centroids.size())));
  if (comps & kIdMapComponents) w.put_span(std::span<const std::uint64_t>(index.doc_ids));
  if (comps & kClusterFetch) {
    WriteFetchHeader(w, *index.clusters);
    WriteAnyMatrix(w, index.clusters->hint);
  }
  if (comps & kDocFetch) {
    WriteFetchHeader(w, *index.docs);
    WriteAnyMatrix(w, index.docs->hint);
  }
  if (comps & kGraphNodes) {
    WriteFetchHeader(w, *index.nodes);
    w.put(index.graph.degree);
    w.put(index.graph.maxabs);
    w.put(index.graph.medoid);
    w.put_span(std::span<const std::uint32_t>(index.graph.representatives));
    WriteAnyMatrix(w, index.nodes->hint);
  }
  if (comps & kScoring) {
    WriteParams(w, *index.score_params);
    w.put(index.scoring.capacity);
    w.put(index.scoring.maxabs);
    for (const auto& rows : index.scoring.row_doc_ids) {
      w.put_span(std::span<const std::uint64_t>(rows));
    }
    for (const auto& h : index.score_hints) WriteMatrix(w, h);
  }
}

PublicSetup ReadPublicSetup(ByteReader& r) {
  PublicSetup s;
  s.components = r.get<std::uint8_t>();
  if (s.components & ~kAllComponents) Inconsistent("unknown component bits");
  s.dim = r.get<std::uint32_t>();
  s.chunk_size = r.get<std::uint32_t>();
  s.n_docs = r.get<std::uint64_t>();
  const auto k = r.get<std::uint32_t>();
  if (s.dim == 0 || k == 0 || s.chunk_size == 0) Inconsistent("zero dim, k or chunk size");
  r.require_items(std::uint64_t{k} * s.dim, sizeof(float));
  s.centroids.resize(k, s.dim);
  r.get_into(std::span<float>(s.centroids.data(), static_cast<std::size_t>(s.centroids.size())));
  if (s.components & kIdMapComponents) {
    r.require_items(s.n_docs, sizeof(std::uint64_t));
    s.doc_ids.resize(s.n_docs);
    r.get_into(std::span<std::uint64_t>(s.doc_ids));
  }
  if (s.components & kClusterFetch) {
    s.clusters = ReadFetchDb(r);
    if (s.clusters->cols != k) Inconsistent("cluster matrix width != k");
    s.clusters->hint = ReadAnyMatrix(r, s.clusters->params);
    CheckHintShape(s.clusters->hint, s.clusters->rows, s.clusters->params, "cluster");
  }
  if (s.components & kDocFetch) {
    s.docs = ReadFetchDb(r);
    if (s.docs->cols != s.n_docs) Inconsistent("doc matrix width != n_docs");
    s.docs->hint = ReadAnyMatrix(r, s.docs->params);
    CheckHintShape(s.docs->hint, s.docs->rows, s.docs->params, "doc");
  }
  if (s.components & kGraphNodes) {
    s.nodes = ReadFetchDb(r);
    if (s.nodes->cols != s.n_docs) Inconsistent("node matrix width != n_docs");
    s.graph.degree = r.get<std::uint32_t>();
    s.graph.maxabs = r.get<float>();
    s.graph.medoid = r.get<std::uint32_t>();
    r.require_items(k, sizeof(std::uint32_t));
    s.graph.representatives.resize(k);
    r.get_into(std::span<std::uint32_t>(s.graph.representatives));
    if (s.nodes->rows != NodeRecordSize(s.dim, s.graph.degree)) Inconsistent("node record size");
    if (s.graph.medoid >= s.n_docs) Inconsistent("medoid out of range");
    for (auto rep : s.graph.representatives) {
      if (rep >= s.n_docs) Inconsistent("representative out of range");
    }
    s.nodes->hint = ReadAnyMatrix(r, s.nodes->params);
    CheckHintShape(s.nodes->hint, s.nodes->rows, s.nodes->params, "node");
  }
  if (s.components & kScoring) {
    s.score_params = ReadParams(r);
    if (s.score_params->cipher_mod_bits != 64) Inconsistent("scoring params must be 64-bit");
    s.score_capacity = r.get<std::uint32_t>();
    s.score_maxabs = r.get<float>();
    r.require_items(std::uint64_t{k} * s.score_capacity, sizeof(std::uint64_t));
    s.score_row_ids.resize(k);
    for (auto& rows : s.score_row_ids) {
      rows.resize(s.score_capacity);
      r.get_into(std::span<std::uint64_t>(rows));
    }
    for (std::uint32_t j = 0; j < k; ++j) {
      s.score_hints.push_back(ReadMatrix<std::uint64_t>(r));
      if (s.score_hints.back().rows() != s.score_capacity ||
          s.score_hints.back().cols() != s.score_params->lwe_dim) {
        Inconsistent("scoring hint shape");
      }
    }
  }
  return s;
}

Bytes SerializeIndex(const Index& index) {
  ByteWriter w;
  w.put_bytes({reinterpret_cast<const std::uint8_t*>(kIndexMagic), 5});
  w.put(kIndexVersion);
  WritePublicSetup(w, index, kAllComponents);
  w.put_span(std::span<const std::uint64_t>(index.doc_ids));
  w.put_span(std::span<const std::uint32_t>(index.assignments));
  if (index.clusters) WriteMatrix(w, index.clusters->plain.entries);
  if (index.docs) WriteMatrix(w, index.docs->plain.entries);
  if (index.nodes) WriteMatrix(w, index.nodes->plain.entries);
  if (index.score_params) {
    for (const auto& m : index.scoring.matrices) WriteMatrix(w, m);
  }
  return w.take();
}

Index DeserializeIndex(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ErrorCode::kTruncatedFile);
  const auto magic = r.get_bytes(5);
  if (std::memcmp(magic.data(), kIndexMagic, 5) != 0) {
    throw Error(ErrorCode::kBadMagic, "not a PRAG1 index file");
  }
  const auto version = r.get<std::uint16_t>();
  if (version != kIndexVersion) {
    throw Error(ErrorCode::kVersionUnsupported,
                "index version " + std::to_string(version) + " (supported: " +
                    std::to_string(kIndexVersion) + ")");
  }
  PublicSetup s = ReadPublicSetup(r);

  Index index;
  index.components = s.components;
  index.dim = s.dim;
  index.chunk_size = s.chunk_size;
  index.centroids = std::move(s.centroids);
  r.require_items(s.n_docs, sizeof(std::uint64_t) + sizeof(std::uint32_t));
  index.doc_ids.resize(s.n_docs);
  r.get_into(std::span<std::uint64_t>(index.doc_ids));
  if ((s.components & kIdMapComponents) && s.doc_ids != index.doc_ids) Inconsistent("doc id map");
  index.assignments.resize(s.n_docs);
  r.get_into(std::span<std::uint32_t>(index.assignments));
  for (auto a : index.assignments) {
    if (a >= index.k()) Inconsistent("assignment out of range");
  }

  auto read_plain = [&r](const PublicFetchDb& pub, std::uint32_t chunk) {
    FetchDatabase db{pub.params, {chunk, ReadMatrix<std::uint8_t>(r)}, pub.hint};
    if (db.plain.m_rows() != pub.rows || db.plain.n_cols() != pub.cols) {
      Inconsistent("plaintext matrix shape");
    }
    return db;
  };
  if (s.clusters) index.clusters = read_plain(*s.clusters, s.chunk_size);
  if (s.docs) index.docs = read_plain(*s.docs, s.chunk_size);
  if (s.nodes) {
    index.nodes = read_plain(*s.nodes, s.nodes->rows);
    index.graph = s.graph;
  }
  if (s.score_params) {
    index.score_params = s.score_params;
    index.scoring.capacity = s.score_capacity;
    index.scoring.maxabs = s.score_maxabs;
    index.scoring.row_doc_ids = std::move(s.score_row_ids);
    index.score_hints = std::move(s.score_hints);
    for (std::uint32_t j = 0; j < index.k(); ++j) {
      index.scoring.matrices.push_back(ReadMatrix<std::int8_t>(r));
      if (index.scoring.matrices.back().rows() != s.score_capacity ||
          index.scoring.matrices.back().cols() != s.dim) {
        Inconsistent("scoring matrix shape");
      }
    }
  }
  if (!r.done()) Inconsistent(std::to_string(r.remaining()) + " trailing bytes");
  return index;
}

void SaveIndex(const Index& index, const std::filesystem::path& path) {
  const Bytes bytes = SerializeIndex(index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Index LoadIndex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return DeserializeIndex(bytes);
}

}  // namespace clusterfetch
