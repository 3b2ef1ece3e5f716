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

#include "clusterfetch/corpus.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"

#include "clusterfetch/error.hpp"

namespace clusterfetch {
namespace {

std::string LineTag(std::size_t line) { return "line " + std::to_string(line); }

}  // namespace

std::vector<EmbeddingRecord> ParseCorpus(std::istream& in) {
  std::vector<EmbeddingRecord> records;
  std::unordered_set<std::uint64_t> seen;
  std::optional<std::size_t> dim;
  std::optional<std::uint64_t> declared_count;
  std::string line;
  std::size_t line_no = 0;
  bool first_object = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, LineTag(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw Error(ErrorCode::kParse, LineTag(line_no) + ": expected a JSON object");
    }
    if (first_object && obj.contains("dim") && !obj.contains("embedding")) {
      first_object = false;
      try {
        dim = obj.at("dim").get<std::size_t>();
        declared_count = obj.at("count").get<std::uint64_t>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kParse, LineTag(line_no) + ": bad manifest: " + e.what());
      }
      continue;
    }
    first_object = false;
    EmbeddingRecord rec;
    try {
      const auto& id = obj.at("id");
      if (!id.is_number_integer()) throw Error(ErrorCode::kParse, "id is not an integer");
      if (id.is_number_unsigned()) {
        rec.doc_id = id.get<std::uint64_t>();
      } else {
        const auto v = id.get<std::int64_t>();
        if (v < 0) throw Error(ErrorCode::kParse, "id is negative");
        rec.doc_id = static_cast<std::uint64_t>(v);
      }
      rec.embedding = obj.at("embedding").get<std::vector<float>>();
      rec.text = obj.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, LineTag(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, LineTag(line_no) + ": " + e.what());
    }
    for (float v : rec.embedding) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kParse, LineTag(line_no) + ": non-finite embedding entry");
      }
    }
    if (!dim) dim = rec.embedding.size();
    if (rec.embedding.size() != *dim || rec.embedding.empty()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  LineTag(line_no) + ": embedding has " +
                      std::to_string(rec.embedding.size()) + " entries, expected " +
                      std::to_string(*dim));
    }
    if (!seen.insert(rec.doc_id).second) {
      throw Error(ErrorCode::kDuplicateId,
                  LineTag(line_no) + ": id " + std::to_string(rec.doc_id) +
                      " already used");
    }
    records.push_back(std::move(rec));
  }
  if (declared_count && *declared_count != records.size()) {
    throw Error(ErrorCode::kParse, "manifest declares " + std::to_string(*declared_count) +
                                       " records, file has " +
                                       std::to_string(records.size()));
  }
  return records;
}

std::vector<EmbeddingRecord> LoadCorpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return ParseCorpus(in);
}

void WriteCorpus(std::ostream& out, std::span<const EmbeddingRecord> records,
                 bool with_manifest) {
  if (with_manifest) {
    const std::size_t dim = records.empty() ? 0 : records.front().embedding.size();
    out << nlohmann::json{{"dim", dim}, {"count", records.size()}}.dump() << '\n';
  }
  for (const auto& r : records) {
    nlohmann::json obj;
    obj["id"] = r.doc_id;
    obj["embedding"] = r.embedding;
    obj["text"] = r.text;
    out << obj.dump() << '\n';
  }
}

RowMatrixXf EmbeddingMatrix(std::span<const EmbeddingRecord> records) {
  const Eigen::Index d =
      records.empty() ? 0 : static_cast<Eigen::Index>(records.front().embedding.size());
  RowMatrixXf m(static_cast<Eigen::Index>(records.size()), d);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (static_cast<Eigen::Index>(records[i].embedding.size()) != d) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "record " + std::to_string(i) + " has a different embedding width");
    }
    m.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXf>(records[i].embedding.data(), d);
  }
  return m;
}

void NormalizeRows(RowMatrixXf& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const float n = m.row(i).norm();
    if (n > 0.0f) m.row(i) /= n;
  }
}

}  // namespace clusterfetch
