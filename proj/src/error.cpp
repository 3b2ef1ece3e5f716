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

#include "clusterfetch/error.hpp"

namespace clusterfetch {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownMessage: return "UnknownMessage";
    case ErrorCode::kProtocol: return "ProtocolError";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kUnknownCluster: return "UnknownCluster";
    case ErrorCode::kUnknownDocId: return "UnknownDocId";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kCorrectnessMarginViolated: return "CorrectnessMarginViolated";
    case ErrorCode::kPlaintextOutOfRange: return "PlaintextOutOfRange";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kClusterOverflow: return "ClusterOverflow";
    case ErrorCode::kUnequalStreamLengths: return "UnequalStreamLengths";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kVersionUnsupported: return "VersionUnsupported";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kFraming: return "FramingError";
    case ErrorCode::kTransport: return "TransportError";
    case ErrorCode::kDecodeSizeMismatch: return "DecodeSizeMismatch";
    case ErrorCode::kInvalidDegree: return "InvalidDegree";
    case ErrorCode::kInvalidEntryPoint: return "InvalidEntryPoint";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kInternal: return "InternalError";
  }
  return "Unknown";
}

}  // namespace clusterfetch
