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

#include "clusterfetch/wire.hpp"

namespace clusterfetch {

std::size_t WireSize(const Frame& f) { return kFrameHeaderBytes + f.payload.size(); }

Bytes EncodeFrame(const Frame& f) {
  if (f.payload.size() + 1 > kMaxFrameLength) {
    throw Error(ErrorCode::kProtocol, "frame exceeds the maximum length");
  }
  ByteWriter w;
  w.reserve(WireSize(f));
  w.put(static_cast<std::uint32_t>(f.payload.size() + 1));
  w.put(f.msg_type);
  w.put_bytes(f.payload);
  return w.take();
}

Frame DecodeFrame(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ErrorCode::kProtocol);
  const auto length = r.get<std::uint32_t>();
  if (length == 0 || length > kMaxFrameLength) {
    throw Error(ErrorCode::kProtocol, "bad frame length " + std::to_string(length));
  }
  if (length != r.remaining()) {
    throw Error(ErrorCode::kProtocol, "frame length " + std::to_string(length) + " but " +
                                          std::to_string(r.remaining()) + " bytes follow");
  }
  Frame f;
  f.msg_type = r.get<std::uint8_t>();
  auto rest = r.get_bytes(r.remaining());
  f.payload.assign(rest.begin(), rest.end());
  return f;
}

Frame ErrorFrame(ErrorCode code, std::string_view message) {
  ByteWriter w;
  w.put(static_cast<std::uint16_t>(code));
  w.put_string(message);
  return MakeFrame(MsgType::kError, w.take());
}

ErrorInfo ParseErrorFrame(const Frame& f) {
  if (f.type() != MsgType::kError) throw Error(ErrorCode::kProtocol, "not an ERROR frame");
  ByteReader r(f.payload, ErrorCode::kProtocol);
  ErrorInfo info;
  info.code = r.get<std::uint16_t>();
  info.message = r.get_string(r.remaining());
  return info;
}

void ExpectType(const Frame& f, MsgType expected) {
  if (f.type() == expected) return;
  if (f.type() == MsgType::kError) {
    const ErrorInfo info = ParseErrorFrame(f);
    const auto code = info.code >= 1 && info.code <= static_cast<std::uint16_t>(ErrorCode::kInternal)
                          ? static_cast<ErrorCode>(info.code)
                          : ErrorCode::kProtocol;
    throw Error(code, "server: " + info.message);
  }
  throw Error(ErrorCode::kProtocol,
              "expected message type " + std::to_string(static_cast<int>(expected)) +
                  ", got " + std::to_string(static_cast<int>(f.msg_type)));
}

Frame MakeScoreQueryFrame(std::uint32_t cluster_id, const PirQuery<std::uint64_t>& q) {
  ByteWriter w;
  w.reserve(8 + 8 * static_cast<std::size_t>(q.entries.size()));
  w.put(cluster_id);
  WriteResidues(w, q.entries);
  return MakeFrame(MsgType::kScoreQuery, w.take());
}

Frame MakeScoreAnswerFrame(const PirAnswer<std::uint64_t>& a) {
  ByteWriter w;
  WriteResidues(w, a.entries);
  return MakeFrame(MsgType::kScoreAnswer, w.take());
}

PirAnswer<std::uint64_t> ParseScoreAnswer(const Frame& f) {
  ExpectType(f, MsgType::kScoreAnswer);
  ByteReader r(f.payload, ErrorCode::kProtocol);
  PirAnswer<std::uint64_t> a{ReadResidues<std::uint64_t>(r)};
  if (!r.done()) throw Error(ErrorCode::kProtocol, "trailing bytes in SCORE_ANSWER");
  return a;
}

}  // namespace clusterfetch
