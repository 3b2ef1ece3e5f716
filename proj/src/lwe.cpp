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

#include "clusterfetch/lwe.hpp"

#include <string>

namespace clusterfetch {
namespace {

std::string U128ToString(unsigned __int128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return s;
}

}  // namespace

unsigned __int128 WorstCaseNoise(std::uint64_t n_cols, const LweParams& params) {
  const std::uint64_t magnitude = params.profile == Profile::kScoring
                                      ? kScoringValueBound
                                      : params.plain_mod - 1;
  return static_cast<unsigned __int128>(n_cols) * magnitude * params.err_bound;
}

void ValidateParams(const LweParams& params) {
  if (params.cipher_mod_bits != 32 && params.cipher_mod_bits != 64) {
    throw Error(ErrorCode::kInvalidArgument,
                "cipher_mod_bits must be 32 or 64, got " +
                    std::to_string(params.cipher_mod_bits));
  }
  if (params.plain_mod < 2 || !std::has_single_bit(params.plain_mod)) {
    throw Error(ErrorCode::kInvalidArgument,
                "plain_mod must be a power of two >= 2, got " +
                    std::to_string(params.plain_mod));
  }
  if (params.plain_bits() >= params.cipher_mod_bits) {
    throw Error(ErrorCode::kInvalidArgument, "plain_mod must be below the ciphertext modulus");
  }
  if (params.lwe_dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "lwe_dim must be >= 1");
  }
  if (params.err_bound > 8) {
    throw Error(ErrorCode::kInvalidArgument, "err_bound above 8 is not sampleable");
  }
}

LweParams DeriveParams(std::uint64_t n_cols, std::uint64_t plain_mod, Profile profile,
                       std::optional<Seed> seed,
                       std::optional<std::uint32_t> cipher_mod_bits) {
  if (n_cols < 1) throw Error(ErrorCode::kInvalidArgument, "n_cols must be >= 1");
  LweParams params;
  params.lwe_dim = kDefaultLweDim;
  params.err_bound = kDefaultErrBound;
  params.profile = profile;
  params.plain_mod = plain_mod;
  params.cipher_mod_bits =
      cipher_mod_bits.value_or(profile == Profile::kScoring ? 64u : 32u);
  ValidateParams(params);

  const unsigned __int128 noise = WorstCaseNoise(n_cols, params);
  const std::uint64_t half_delta = params.delta() / 2;
  if (noise >= half_delta) {
    throw Error(ErrorCode::kCorrectnessMarginViolated,
                "worst-case noise " + U128ToString(noise) + " for " +
                    std::to_string(n_cols) + " columns is not below delta/2 = " +
                    std::to_string(half_delta) +
                    "; shrink plain_mod, reduce columns or widen the modulus");
  }
  if (profile == Profile::kScoring) {
    const unsigned __int128 max_score = static_cast<unsigned __int128>(n_cols) *
                                        kScoringValueBound * kScoringValueBound;
    if (max_score >= plain_mod / 2) {
      throw Error(ErrorCode::kCorrectnessMarginViolated,
                  "inner products up to " + U128ToString(max_score) +
                      " do not fit below p/2 = " + std::to_string(plain_mod / 2));
    }
  }
  params.seed = seed ? *seed : RandomSeed();
  return params;
}

LweParams DeriveByteFetchParams(std::uint64_t n_cols, std::optional<Seed> seed) {
  try {
    return DeriveParams(n_cols, 256, Profile::kFetch, seed, 32);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kCorrectnessMarginViolated) throw;
  }
  return DeriveParams(n_cols, 256, Profile::kFetch, seed, 64);
}

void WriteParams(ByteWriter& w, const LweParams& params) {
  w.put(params.lwe_dim);
  w.put(static_cast<std::uint8_t>(params.cipher_mod_bits));
  w.put(static_cast<std::uint8_t>(params.profile));
  w.put(params.plain_mod);
  w.put(params.err_bound);
  w.put_bytes(params.seed);
}

LweParams ReadParams(ByteReader& r) {
  LweParams params;
  params.lwe_dim = r.get<std::uint32_t>();
  params.cipher_mod_bits = r.get<std::uint8_t>();
  const auto profile = r.get<std::uint8_t>();
  if (profile > 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown profile tag " + std::to_string(profile));
  }
  params.profile = static_cast<Profile>(profile);
  params.plain_mod = r.get<std::uint64_t>();
  params.err_bound = r.get<std::uint32_t>();
  auto seed = r.get_bytes(params.seed.size());
  std::copy(seed.begin(), seed.end(), params.seed.begin());
  ValidateParams(params);
  return params;
}

}  // namespace clusterfetch
