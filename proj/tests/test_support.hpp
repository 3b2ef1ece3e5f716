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

#ifndef CLUSTERFETCH_TESTS_TEST_SUPPORT_HPP_
#define CLUSTERFETCH_TESTS_TEST_SUPPORT_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "clusterfetch/index.hpp"
#include "clusterfetch/lwe.hpp"

namespace clusterfetch::testing {

// Random records with ids offset by `id_base`, texts of 0..max_text bytes.
inline std::vector<EmbeddingRecord> RandomRecords(std::size_t n, std::size_t dim,
                                                  std::uint64_t seed,
                                                  std::size_t max_text = 40,
                                                  std::uint64_t id_base = 100) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::uniform_int_distribution<std::size_t> len(0, max_text);
  std::uniform_int_distribution<int> ch('a', 'z');
  std::vector<EmbeddingRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    EmbeddingRecord r;
    r.doc_id = id_base + i;
    r.embedding.resize(dim);
    for (auto& v : r.embedding) v = normal(rng);
    r.text.resize(len(rng));
    for (auto& c : r.text) c = static_cast<char>(ch(rng));
    out.push_back(std::move(r));
  }
  return out;
}

// Private fetch of column `col` using the library primitives directly.
inline Bytes PirFetch(const FetchDatabase& db, std::size_t col, std::uint64_t seed) {
  return WithWord(db.params.cipher_mod_bits, [&]<class Word>(Word) {
    const auto n = db.plain.n_cols();
    const auto a = ExpandMatrix<Word>(db.params.seed, static_cast<Eigen::Index>(n),
                                      db.params.lwe_dim);
    const auto lifted = LiftPlaintext<Word>(db.plain.entries, db.params);
    const PirHint<Word> hint{std::get<Matrix<Word>>(db.hint)};
    const auto sk = KeyGen<Word>(db.params, SeedFromInt(seed));
    std::vector<std::uint64_t> u(n, 0);
    u[col] = 1;
    const auto q = EncryptVector<Word>(db.params, sk, a, u, SeedFromInt(seed + 1));
    const auto out = DecodeValues(Answer(lifted, q), hint, sk, db.params);
    return Bytes(out.begin(), out.end());
  });
}

}  // namespace clusterfetch::testing

#endif  // CLUSTERFETCH_TESTS_TEST_SUPPORT_HPP_
