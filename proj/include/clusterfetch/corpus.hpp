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

#ifndef CLUSTERFETCH_CORPUS_HPP_
#define CLUSTERFETCH_CORPUS_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace clusterfetch {

using RowMatrixXf =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EmbeddingRecord {
  std::uint64_t doc_id = 0;
  std::vector<float> embedding;
  std::string text;

  bool operator==(const EmbeddingRecord&) const = default;
};

// JSON-lines corpus: optional manifest {"dim": d, "count": N} on the first
// line, then one {"id", "embedding", "text"} object per line. Blank lines are
// skipped. Errors name the 1-based line number.
std::vector<EmbeddingRecord> ParseCorpus(std::istream& in);
std::vector<EmbeddingRecord> LoadCorpus(const std::filesystem::path& path);

void WriteCorpus(std::ostream& out, std::span<const EmbeddingRecord> records,
                 bool with_manifest = true);

// N x d matrix of the corpus embeddings, in corpus order.
RowMatrixXf EmbeddingMatrix(std::span<const EmbeddingRecord> records);

// Scales every row to unit L2 norm; zero rows stay zero.
void NormalizeRows(RowMatrixXf& m);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_CORPUS_HPP_
