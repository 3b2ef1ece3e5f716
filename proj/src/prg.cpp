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

#include "clusterfetch/prg.hpp"

#include <sodium.h>

#include <bit>
#include <cstring>
#include <stdexcept>

#include "clusterfetch/error.hpp"

namespace clusterfetch {
namespace {

void EnsureSodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw Error(ErrorCode::kInternal, "libsodium initialization failed");
}

}  // namespace

Seed RandomSeed() {
  EnsureSodium();
  Seed s;
  randombytes_buf(s.data(), s.size());
  return s;
}

Seed SeedFromInt(std::uint64_t value) {
  Seed s{};
  std::memcpy(s.data(), &value, sizeof(value));
  return DeriveSeed(s, "int-seed");
}

Seed DeriveSeed(const Seed& parent, std::string_view label) {
  EnsureSodium();
  Seed out;
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, out.size());
  crypto_generichash_update(&st, parent.data(), parent.size());
  crypto_generichash_update(
      &st, reinterpret_cast<const unsigned char*>(label.data()), label.size());
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

Prg::Prg(const Seed& seed) : key_(seed) { EnsureSodium(); }

void Prg::Refill() {
  static constexpr std::array<std::uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES>
      kNonce{};
  buf_.fill(0);
  // IETF ChaCha20 has a 32-bit block counter; 4096-byte refills advance it
  // by 64 blocks, so one stream yields 256 GiB before wrapping.
  crypto_stream_chacha20_ietf_xor_ic(buf_.data(), buf_.data(), buf_.size(),
                                     kNonce.data(),
                                     static_cast<std::uint32_t>(block_counter_),
                                     key_.data());
  block_counter_ += buf_.size() / 64;
  pos_ = 0;
}

void Prg::Fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buf_.size()) Refill();
    const std::size_t n = std::min(out.size() - done, buf_.size() - pos_);
    std::memcpy(out.data() + done, buf_.data() + pos_, n);
    pos_ += n;
    done += n;
  }
}

int Prg::CenteredBinomial(int eta) {
  if (eta < 0 || eta > 8) {
    throw Error(ErrorCode::kInvalidArgument, "centered binomial eta must be in [0, 8]");
  }
  const auto bits = Next<std::uint16_t>();
  const unsigned mask = (1u << eta) - 1u;
  return std::popcount(static_cast<unsigned>(bits & mask)) -
         std::popcount(static_cast<unsigned>((bits >> 8) & mask));
}

}  // namespace clusterfetch
