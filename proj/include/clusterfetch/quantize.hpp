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

#ifndef CLUSTERFETCH_QUANTIZE_HPP_
#define CLUSTERFETCH_QUANTIZE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "clusterfetch/corpus.hpp"

namespace clusterfetch {

inline constexpr int kQuantMax = 127;

// clamp(round(v * 127 / maxabs), -127, 127). Throws kNonFiniteInput for a
// non-finite v and kInvalidArgument unless maxabs > 0.
std::int8_t QuantizeValue(float v, float maxabs);
std::vector<std::int8_t> QuantizeVector(std::span<const float> v, float maxabs);
std::vector<float> Dequantize(std::span<const std::int8_t> q, float maxabs);

// Largest |entry| across the corpus; 1 for an all-zero corpus.
float CorpusMaxAbs(const RowMatrixXf& vectors);

// Signed value <-> centered residue mod p (negative values map to p - |v|).
std::uint64_t EncodeCentered(std::int64_t v, std::uint64_t plain_mod);
std::int64_t DecodeCentered(std::uint64_t r, std::uint64_t plain_mod);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_QUANTIZE_HPP_
