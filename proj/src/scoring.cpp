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

#include "clusterfetch/scoring.hpp"

#include <algorithm>

#include "clusterfetch/quantize.hpp"

namespace clusterfetch {

bool ScoreDatabase::operator==(const ScoreDatabase& o) const {
  if (capacity != o.capacity || maxabs != o.maxabs || row_doc_ids != o.row_doc_ids ||
      matrices.size() != o.matrices.size()) {
    return false;
  }
  for (std::size_t j = 0; j < matrices.size(); ++j) {
    if (!SameMatrix(matrices[j], o.matrices[j])) return false;
  }
  return true;
}

std::vector<std::uint64_t> QuantizeEmbedding(std::span<const float> v, float maxabs,
                                             std::uint64_t plain_mod) {
  std::vector<std::uint64_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = EncodeCentered(QuantizeValue(v[i], maxabs), plain_mod);
  }
  return out;
}

ScoreDatabase BuildEmbeddingMatrices(const ClusterModel& model, const RowMatrixXf& vectors,
                                     std::span<const std::uint64_t> doc_ids, float maxabs) {
  if (static_cast<std::size_t>(vectors.rows()) != doc_ids.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "doc id count differs from vector count");
  }
  const auto members = model.Members();
  ScoreDatabase db;
  db.maxabs = maxabs;
  for (const auto& m : members) {
    db.capacity = std::max(db.capacity, static_cast<std::uint32_t>(m.size()));
  }
  db.capacity = std::max<std::uint32_t>(db.capacity, 1);
  for (const auto& m : members) {
    Int8Matrix mat = Int8Matrix::Zero(db.capacity, vectors.cols());
    std::vector<std::uint64_t> rows(db.capacity, kPaddingRow);
    for (std::size_t r = 0; r < m.size(); ++r) {
      const auto q = QuantizeVector(
          std::span<const float>(vectors.row(m[r]).data(), static_cast<std::size_t>(vectors.cols())),
          maxabs);
      for (std::size_t c = 0; c < q.size(); ++c) {
        mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = q[c];
      }
      rows[r] = doc_ids[m[r]];
    }
    db.matrices.push_back(std::move(mat));
    db.row_doc_ids.push_back(std::move(rows));
  }
  return db;
}

std::vector<std::uint64_t> SelectTopKIds(std::span<const ScoredDoc> scores, std::size_t k) {
  std::vector<ScoredDoc> real;
  real.reserve(scores.size());
  for (const auto& s : scores) {
    if (s.doc_id != kPaddingRow) real.push_back(s);
  }
  const std::size_t n = std::min(k, real.size());
  std::partial_sort(real.begin(), real.begin() + static_cast<std::ptrdiff_t>(n), real.end(),
                    [](const ScoredDoc& a, const ScoredDoc& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.doc_id < b.doc_id;
                    });
  std::vector<std::uint64_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = real[i].doc_id;
  return ids;
}

}  // namespace clusterfetch
