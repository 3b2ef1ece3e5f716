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

#ifndef CLUSTERFETCH_LWE_HPP_
#define CLUSTERFETCH_LWE_HPP_

// Secret-key LWE with a per-database hint: the client encrypts a selector
// vector, the server multiplies its plaintext matrix against the ciphertext,
// and the client strips the key-dependent term using hint = D * A.
//
// Ciphertext arithmetic is native wraparound on the residue word, so the
// ciphertext modulus is 2^32 (uint32_t) or 2^64 (uint64_t).

#include <Eigen/Core>

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "clusterfetch/bytes.hpp"
#include "clusterfetch/error.hpp"
#include "clusterfetch/prg.hpp"

namespace clusterfetch {

template <class Word>
concept ResidueWord =
    std::is_same_v<Word, std::uint32_t> || std::is_same_v<Word, std::uint64_t>;

template <class Word>
using Matrix =
    Eigen::Matrix<Word, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class Word>
using Vector = Eigen::Matrix<Word, Eigen::Dynamic, 1>;

using ByteMatrix = Matrix<std::uint8_t>;

// Fetch databases hold raw bytes in [0, p); scoring databases hold small
// signed values lifted to their centered representatives.
enum class Profile : std::uint8_t { kFetch = 0, kScoring = 1 };

inline constexpr std::uint32_t kDefaultLweDim = 1024;
inline constexpr std::uint32_t kDefaultErrBound = 8;  // centered binomial, eta = 8
inline constexpr std::uint64_t kScoringPlainMod = std::uint64_t{1} << 26;
inline constexpr std::uint64_t kScoringValueBound = 127;

struct LweParams {
  std::uint32_t lwe_dim = kDefaultLweDim;
  std::uint32_t cipher_mod_bits = 32;
  std::uint64_t plain_mod = 256;
  std::uint32_t err_bound = kDefaultErrBound;
  Profile profile = Profile::kFetch;
  Seed seed{};

  std::uint32_t plain_bits() const {
    return static_cast<std::uint32_t>(std::countr_zero(plain_mod));
  }
  std::uint32_t delta_bits() const { return cipher_mod_bits - plain_bits(); }
  std::uint64_t delta() const { return std::uint64_t{1} << delta_bits(); }
  std::size_t residue_bytes() const { return cipher_mod_bits / 8; }

  bool operator==(const LweParams&) const = default;
};

// Worst-case |noise| after a plaintext-matrix product over `n_cols` columns:
// n * (p - 1) * B for fetch, n * 127 * B for scoring (entries bounded by 127
// in magnitude after centered lifting).
unsigned __int128 WorstCaseNoise(std::uint64_t n_cols, const LweParams& params);

// Validates the invariants of a params block (power-of-two p, p < q,
// supported word size). Throws kInvalidArgument.
void ValidateParams(const LweParams& params);

// lwe_dim = 1024, B = 8, 32-bit modulus for fetch and 64-bit for scoring
// unless `cipher_mod_bits` overrides. Throws kCorrectnessMarginViolated when
// the worst-case noise for `n_cols` reaches delta / 2; for scoring also when
// n_cols * 127^2 reaches p / 2 (decoded inner products would wrap).
LweParams DeriveParams(std::uint64_t n_cols, std::uint64_t plain_mod,
                       Profile profile, std::optional<Seed> seed = std::nullopt,
                       std::optional<std::uint32_t> cipher_mod_bits = std::nullopt);

// Byte-valued fetch params for an `n_cols`-column database: the 32-bit
// modulus when its margin holds, otherwise the 64-bit one.
LweParams DeriveByteFetchParams(std::uint64_t n_cols,
                                std::optional<Seed> seed = std::nullopt);

void WriteParams(ByteWriter& w, const LweParams& params);
LweParams ReadParams(ByteReader& r);

template <ResidueWord Word>
void CheckWord(const LweParams& params) {
  if (params.cipher_mod_bits != 8 * sizeof(Word)) {
    throw Error(ErrorCode::kInvalidArgument,
                "params use a " + std::to_string(params.cipher_mod_bits) +
                    "-bit modulus but the residue word has " +
                    std::to_string(8 * sizeof(Word)) + " bits");
  }
}

// Calls f(Word{}) with the residue type matching `bits`.
template <class F>
decltype(auto) WithWord(std::uint32_t bits, F&& f) {
  if (bits == 32) return f(std::uint32_t{});
  if (bits == 64) return f(std::uint64_t{});
  throw Error(ErrorCode::kInvalidArgument,
              "unsupported ciphertext modulus bits " + std::to_string(bits));
}

using AnyMatrix = std::variant<Matrix<std::uint32_t>, Matrix<std::uint64_t>>;

// Entrywise equality that is false (not an assertion) on shape mismatch.
template <class A, class B>
bool SameMatrix(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

inline bool SameMatrix(const AnyMatrix& a, const AnyMatrix& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&b](const auto& x) {
        return SameMatrix(x, std::get<std::decay_t<decltype(x)>>(b));
      },
      a);
}

// Public matrix A: rows * cols words read row-major from the ChaCha20 stream
// of `seed`, so (seed, 2, 3) and (seed, 3, 2) share the same flat sequence.
template <ResidueWord Word>
Matrix<Word> ExpandMatrix(const Seed& seed, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorCode::kInvalidArgument, "public matrix dims must be >= 1");
  }
  Matrix<Word> a(rows, cols);
  Prg prg(seed);
  prg.Fill({reinterpret_cast<std::uint8_t*>(a.data()),
            static_cast<std::size_t>(a.size()) * sizeof(Word)});
  return a;
}

template <ResidueWord Word>
struct SecretKey {
  Vector<Word> s;
};

template <ResidueWord Word>
SecretKey<Word> KeyGen(const LweParams& params, const Seed& rng_seed) {
  CheckWord<Word>(params);
  SecretKey<Word> key{Vector<Word>(params.lwe_dim)};
  Prg prg(rng_seed);
  prg.Fill({reinterpret_cast<std::uint8_t*>(key.s.data()),
            static_cast<std::size_t>(key.s.size()) * sizeof(Word)});
  return key;
}

// Tag that gates the zero-key / zero-error construction paths.
struct InsecureTestOnly {
  explicit InsecureTestOnly() = default;
};

template <ResidueWord Word>
SecretKey<Word> ZeroKey(const LweParams& params, InsecureTestOnly) {
  CheckWord<Word>(params);
  return {Vector<Word>::Zero(params.lwe_dim)};
}

template <ResidueWord Word>
struct PirQuery {
  Vector<Word> entries;
  Profile profile = Profile::kFetch;
};

template <ResidueWord Word>
struct PirAnswer {
  Vector<Word> entries;
};

template <ResidueWord Word>
struct PirHint {
  Matrix<Word> h;
};

namespace detail {

template <ResidueWord Word>
PirQuery<Word> Encrypt(const LweParams& params, const SecretKey<Word>& sk,
                       const Matrix<Word>& a, std::span<const std::uint64_t> u,
                       const Seed* noise_seed) {
  CheckWord<Word>(params);
  if (a.rows() != static_cast<Eigen::Index>(u.size()) ||
      a.cols() != static_cast<Eigen::Index>(params.lwe_dim) ||
      sk.s.size() != a.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "public matrix is " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + ", plaintext has " +
                    std::to_string(u.size()) + " entries, key has " +
                    std::to_string(sk.s.size()));
  }
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (u[j] >= params.plain_mod) {
      throw Error(ErrorCode::kPlaintextOutOfRange,
                  "entry " + std::to_string(j) + " = " + std::to_string(u[j]) +
                      " >= p = " + std::to_string(params.plain_mod));
    }
  }
  PirQuery<Word> q{a * sk.s, params.profile};
  const Word delta = static_cast<Word>(params.delta());
  std::optional<Prg> prg;
  if (noise_seed != nullptr) prg.emplace(*noise_seed);
  const int eta = static_cast<int>(params.err_bound);
  for (std::size_t j = 0; j < u.size(); ++j) {
    Word e = 0;
    if (prg) e = static_cast<Word>(static_cast<std::int64_t>(prg->CenteredBinomial(eta)));
    q.entries[static_cast<Eigen::Index>(j)] += e + delta * static_cast<Word>(u[j]);
  }
  return q;
}

}  // namespace detail

// entries_j = <A_j, s> + e_j + delta * u_j  (mod 2^bits), e_j centered
// binomial. Deterministic for a fixed rng_seed.
template <ResidueWord Word>
PirQuery<Word> EncryptVector(const LweParams& params, const SecretKey<Word>& sk,
                             const Matrix<Word>& a,
                             std::span<const std::uint64_t> u,
                             const Seed& rng_seed) {
  return detail::Encrypt(params, sk, a, u, &rng_seed);
}

template <ResidueWord Word>
PirQuery<Word> EncryptVectorNoiseless(const LweParams& params,
                                      const SecretKey<Word>& sk,
                                      const Matrix<Word>& a,
                                      std::span<const std::uint64_t> u,
                                      InsecureTestOnly) {
  return detail::Encrypt<Word>(params, sk, a, u, nullptr);
}

// Lifts a plaintext matrix into the residue ring. Signed scalars are taken
// as centered representatives; unsigned scalars are residues in [0, p),
// lifted as-is for fetch params and to [-p/2, p/2) for scoring params.
template <ResidueWord Word, class Derived>
Matrix<Word> LiftPlaintext(const Eigen::MatrixBase<Derived>& d,
                           const LweParams& params) {
  using Scalar = typename Derived::Scalar;
  CheckWord<Word>(params);
  const std::uint64_t p = params.plain_mod;
  return d.unaryExpr([p, centered = params.profile == Profile::kScoring](Scalar v) {
           if constexpr (std::is_signed_v<Scalar>) {
             return static_cast<Word>(static_cast<std::int64_t>(v));
           } else {
             const auto x = static_cast<std::uint64_t>(v);
             if (centered && x >= p / 2) {
               return static_cast<Word>(static_cast<Word>(x) - static_cast<Word>(p));
             }
             return static_cast<Word>(x);
           }
         })
      .eval();
}

// h = D * A over the residue ring.
template <ResidueWord Word>
PirHint<Word> ComputeHint(const Matrix<Word>& d, const Matrix<Word>& a) {
  if (d.cols() != a.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "database has " + std::to_string(d.cols()) +
                    " columns but public matrix has " + std::to_string(a.rows()) +
                    " rows");
  }
  PirHint<Word> hint;
  hint.h.noalias() = d * a;
  return hint;
}

// The server's whole online computation: D * q.
template <ResidueWord Word>
PirAnswer<Word> Answer(const Matrix<Word>& d, const PirQuery<Word>& q) {
  if (q.entries.size() != d.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query has " + std::to_string(q.entries.size()) +
                    " entries, database has " + std::to_string(d.cols()) +
                    " columns");
  }
  PirAnswer<Word> ans;
  ans.entries.noalias() = d * q.entries;
  return ans;
}

// ans - hint * s: delta * (D u) plus noise D e.
template <ResidueWord Word>
Vector<Word> DecryptRaw(const PirAnswer<Word>& ans, const PirHint<Word>& hint,
                        const SecretKey<Word>& sk) {
  if (ans.entries.size() != hint.h.rows() || hint.h.cols() != sk.s.size()) {
    throw Error(ErrorCode::kDecodeSizeMismatch,
                "answer has " + std::to_string(ans.entries.size()) +
                    " rows, hint is " + std::to_string(hint.h.rows()) + "x" +
                    std::to_string(hint.h.cols()) + ", key has " +
                    std::to_string(sk.s.size()));
  }
  Vector<Word> raw = ans.entries;
  raw.noalias() -= hint.h * sk.s;
  return raw;
}

// Nearest multiple of delta, ties rounded up: floor((raw + delta/2) / delta).
template <ResidueWord Word>
std::uint64_t RoundToPlain(Word raw, const LweParams& params) {
  const Word half = static_cast<Word>(params.delta() >> 1);
  return static_cast<std::uint64_t>(static_cast<Word>(raw + half) >> params.delta_bits()) &
         (params.plain_mod - 1);
}

template <ResidueWord Word>
std::vector<std::uint64_t> DecodeValues(const PirAnswer<Word>& ans,
                                        const PirHint<Word>& hint,
                                        const SecretKey<Word>& sk,
                                        const LweParams& params) {
  CheckWord<Word>(params);
  const Vector<Word> raw = DecryptRaw(ans, hint, sk);
  std::vector<std::uint64_t> out(static_cast<std::size_t>(raw.size()));
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    out[static_cast<std::size_t>(i)] = RoundToPlain<Word>(raw[i], params);
  }
  return out;
}

// Signed distance between a raw decryption and delta * expected.
template <ResidueWord Word>
std::int64_t CenteredNoise(Word raw, std::uint64_t expected, const LweParams& params) {
  using Signed = std::make_signed_t<Word>;
  const Word diff = raw - static_cast<Word>(params.delta()) * static_cast<Word>(expected);
  return static_cast<std::int64_t>(static_cast<Signed>(diff));
}

// Little-endian fixed-width residue vectors (u32 count, then entries).
template <ResidueWord Word>
void WriteResidues(ByteWriter& w, const Vector<Word>& v) {
  w.put(static_cast<std::uint32_t>(v.size()));
  w.put_span(std::span<const Word>(v.data(), static_cast<std::size_t>(v.size())));
}

template <ResidueWord Word>
Vector<Word> ReadResidues(ByteReader& r) {
  const auto n = r.get<std::uint32_t>();
  r.require_items(n, sizeof(Word));
  Vector<Word> v(n);
  r.get_into(std::span<Word>(v.data(), n));
  return v;
}

template <class Scalar>
void WriteMatrix(ByteWriter& w, const Matrix<Scalar>& m) {
  w.put(static_cast<std::uint32_t>(m.rows()));
  w.put(static_cast<std::uint32_t>(m.cols()));
  w.put_span(std::span<const Scalar>(m.data(), static_cast<std::size_t>(m.size())));
}

template <class Scalar>
Matrix<Scalar> ReadMatrix(ByteReader& r) {
  const auto rows = r.get<std::uint32_t>();
  const auto cols = r.get<std::uint32_t>();
  r.require_items(std::uint64_t{rows} * cols, sizeof(Scalar));
  Matrix<Scalar> m(rows, cols);
  r.get_into(std::span<Scalar>(m.data(), static_cast<std::size_t>(m.size())));
  return m;
}

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_LWE_HPP_
