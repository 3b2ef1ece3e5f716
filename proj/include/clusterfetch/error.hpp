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

#ifndef CLUSTERFETCH_ERROR_HPP_
#define CLUSTERFETCH_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace clusterfetch {

// Numeric values double as the u16 code carried by ERROR frames.
enum class ErrorCode : std::uint16_t {
  kUnknownMessage = 1,
  kProtocol = 2,
  kDimensionMismatch = 3,
  kUnknownCluster = 4,
  kUnknownDocId = 5,
  kInvalidArgument = 6,
  kCorrectnessMarginViolated = 7,
  kPlaintextOutOfRange = 8,
  kParse = 9,
  kDuplicateId = 10,
  kInvalidK = 11,
  kClusterOverflow = 12,
  kUnequalStreamLengths = 13,
  kBadMagic = 14,
  kVersionUnsupported = 15,
  kTruncatedFile = 16,
  kFraming = 17,
  kTransport = 18,
  kDecodeSizeMismatch = 19,
  kInvalidDegree = 20,
  kInvalidEntryPoint = 21,
  kNonFiniteInput = 22,
  kInvalidConfig = 23,
  kIo = 24,
  kInternal = 25,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_ERROR_HPP_
