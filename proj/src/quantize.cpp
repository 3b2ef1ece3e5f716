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

#include "clusterfetch/quantize.hpp"

#include <algorithm>
#include <cmath>

#include "clusterfetch/error.hpp"

namespace clusterfetch {

std::int8_t QuantizeValue(float v, float maxabs) {
  if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteInput, "cannot quantize NaN/Inf");
  if (!(maxabs > 0.0f) || !std::isfinite(maxabs)) {
    throw Error(ErrorCode::kInvalidArgument, "maxabs must be a positive finite value");
  }
  const double scaled = std::round(static_cast<double>(v) * kQuantMax / maxabs);
  return static_cast<std::int8_t>(std::clamp(scaled, -double{kQuantMax}, double{kQuantMax}));
}

std::vector<std::int8_t> QuantizeVector(std::span<const float> v, float maxabs) {
  std::vector<std::int8_t> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(),
                 [maxabs](float x) { return QuantizeValue(x, maxabs); });
  return out;
}

std::vector<float> Dequantize(std::span<const std::int8_t> q, float maxabs) {
  std::vector<float> out(q.size());
  std::transform(q.begin(), q.end(), out.begin(), [maxabs](std::int8_t x) {
    return static_cast<float>(x) * maxabs / static_cast<float>(kQuantMax);
  });
  return out;
}

float CorpusMaxAbs(const RowMatrixXf& vectors) {
  const float m = vectors.size() == 0 ? 0.0f : vectors.cwiseAbs().maxCoeff();
  return m > 0.0f ? m : 1.0f;
}

std::uint64_t EncodeCentered(std::int64_t v, std::uint64_t plain_mod) {
  return static_cast<std::uint64_t>(v) & (plain_mod - 1);
}

std::int64_t DecodeCentered(std::uint64_t r, std::uint64_t plain_mod) {
  r &= plain_mod - 1;
  return r >= plain_mod / 2 ? static_cast<std::int64_t>(r) - static_cast<std::int64_t>(plain_mod)
                            : static_cast<std::int64_t>(r);
}

}  // namespace clusterfetch
