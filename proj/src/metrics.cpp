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

#include "clusterfetch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "clusterfetch/error.hpp"

namespace clusterfetch {
namespace {

std::vector<std::uint64_t> TopByScore(std::vector<std::pair<double, std::uint64_t>> scored,
                                      std::size_t r) {
  if (r > scored.size()) {
    throw Error(ErrorCode::kInvalidArgument, "r = " + std::to_string(r) + " exceeds corpus of " +
                                                 std::to_string(scored.size()));
  }
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(r),
                    scored.end(), [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<std::uint64_t> out;
  out.reserve(r);
  for (std::size_t i = 0; i < r; ++i) out.push_back(scored[i].second);
  return out;
}

std::size_t CountHits(std::span<const std::uint64_t> ranked,
                      std::span<const std::uint64_t> relevant, std::size_t k,
                      std::vector<bool>* hit_at = nullptr) {
  const std::unordered_set<std::uint64_t> rel(relevant.begin(), relevant.end());
  std::unordered_set<std::uint64_t> seen;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    const bool hit = rel.contains(ranked[i]) && seen.insert(ranked[i]).second;
    hits += hit;
    if (hit_at) hit_at->push_back(hit);
  }
  return hits;
}

}  // namespace

std::vector<std::uint64_t> ExactTopK(std::span<const float> query,
                                     std::span<const EmbeddingRecord> corpus, std::size_t r) {
  double qn = 0;
  for (float v : query) qn += static_cast<double>(v) * v;
  qn = std::sqrt(qn);
  std::vector<std::pair<double, std::uint64_t>> scored;
  scored.reserve(corpus.size());
  for (const auto& doc : corpus) {
    if (doc.embedding.size() != query.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "doc " + std::to_string(doc.doc_id));
    }
    double dot = 0, dn = 0;
    for (std::size_t i = 0; i < query.size(); ++i) {
      dot += static_cast<double>(query[i]) * doc.embedding[i];
      dn += static_cast<double>(doc.embedding[i]) * doc.embedding[i];
    }
    const double denom = qn * std::sqrt(dn);
    scored.emplace_back(denom == 0 ? 0.0 : dot / denom, doc.doc_id);
  }
  return TopByScore(std::move(scored), r);
}

std::vector<std::uint64_t> ExactTopK(std::span<const float> query, const RowMatrixXf& vectors,
                                     std::span<const std::uint64_t> doc_ids, std::size_t r) {
  if (static_cast<Eigen::Index>(query.size()) != vectors.cols() ||
      static_cast<Eigen::Index>(doc_ids.size()) != vectors.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "query, vectors and ids disagree in shape");
  }
  const Eigen::Map<const Eigen::VectorXf> q(query.data(), static_cast<Eigen::Index>(query.size()));
  const Eigen::VectorXd scores = (vectors * q).cast<double>();
  std::vector<std::pair<double, std::uint64_t>> scored;
  scored.reserve(doc_ids.size());
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    scored.emplace_back(scores[static_cast<Eigen::Index>(i)], doc_ids[i]);
  }
  return TopByScore(std::move(scored), r);
}

double NdcgAtK(std::span<const std::uint64_t> ranked, std::span<const std::uint64_t> relevant,
               std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  std::vector<bool> hit_at;
  CountHits(ranked, relevant, k, &hit_at);
  double dcg = 0;
  for (std::size_t i = 0; i < hit_at.size(); ++i) {
    if (hit_at[i]) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  const std::unordered_set<std::uint64_t> rel(relevant.begin(), relevant.end());
  double idcg = 0;
  for (std::size_t i = 0; i < std::min(k, rel.size()); ++i) {
    idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return idcg == 0 ? 0.0 : dcg / idcg;
}

PrecisionRecall PrecisionRecallAtK(std::span<const std::uint64_t> ranked,
                                   std::span<const std::uint64_t> relevant, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const std::size_t hits = CountHits(ranked, relevant, k);
  const std::unordered_set<std::uint64_t> rel(relevant.begin(), relevant.end());
  PrecisionRecall pr;
  pr.precision = static_cast<double>(hits) / static_cast<double>(k);
  pr.recall = rel.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(rel.size());
  return pr;
}

}  // namespace clusterfetch
