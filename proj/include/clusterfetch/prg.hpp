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

#ifndef CLUSTERFETCH_PRG_HPP_
#define CLUSTERFETCH_PRG_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace clusterfetch {

using Seed = std::array<std::uint8_t, 32>;

// 32 bytes from the operating system's CSPRNG.
Seed RandomSeed();

// Deterministic seed from a 64-bit value (tests, benchmarks, CLI --seed).
Seed SeedFromInt(std::uint64_t value);

// Domain-separated child seed: hash(parent || label).
Seed DeriveSeed(const Seed& parent, std::string_view label);

// ChaCha20 keystream keyed by a 32-byte seed, read sequentially.
class Prg {
 public:
  explicit Prg(const Seed& seed);

  void Fill(std::span<std::uint8_t> out);

  template <class Word>
  Word Next() {
    Word w;
    Fill({reinterpret_cast<std::uint8_t*>(&w), sizeof(Word)});
    return w;
  }

  // Centered binomial with parameter eta <= 8: popcount(a) - popcount(b) for
  // two independent eta-bit strings. Support is [-eta, eta].
  int CenteredBinomial(int eta);

 private:
  void Refill();

  Seed key_;
  std::uint64_t block_counter_ = 0;
  std::array<std::uint8_t, 4096> buf_{};
  std::size_t pos_ = 4096;
};

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_PRG_HPP_
