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

#ifndef CLUSTERFETCH_WIRE_HPP_
#define CLUSTERFETCH_WIRE_HPP_

// Length-prefixed frames: [u32 length][u8 msg_type][payload], where length
// counts msg_type plus payload. All integers little-endian.
//
//   SETUP_REQ   0x01  [u8 component mask]?  (empty payload: everything)
//   SETUP_RESP  0x02  public setup block (see index.hpp)
//   PIR_QUERY   0x03  u8 target (0 cluster, 1 doc, 2 node) | u32 n | n residues
//   PIR_ANSWER  0x04  u32 m | m residues
//   SCORE_QUERY 0x05  u32 cluster_id | u32 d | d residues (8 bytes each)
//   SCORE_ANSWER 0x06 u32 capacity | capacity residues (8 bytes each)
//   ERROR       0x7F  u16 code | UTF-8 message
//
// Residues are 4 or 8 bytes wide, as fixed by the target's params.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "clusterfetch/bytes.hpp"
#include "clusterfetch/error.hpp"
#include "clusterfetch/lwe.hpp"

namespace clusterfetch {

enum class MsgType : std::uint8_t {
  kSetupReq = 0x01,
  kSetupResp = 0x02,
  kPirQuery = 0x03,
  kPirAnswer = 0x04,
  kScoreQuery = 0x05,
  kScoreAnswer = 0x06,
  kError = 0x7F,
};

enum class TargetMatrix : std::uint8_t { kCluster = 0, kDoc = 1, kNode = 2 };

inline constexpr std::size_t kFrameHeaderBytes = 5;
inline constexpr std::uint32_t kMaxFrameLength = 1u << 30;

struct Frame {
  std::uint8_t msg_type = 0;
  Bytes payload;

  MsgType type() const { return static_cast<MsgType>(msg_type); }
  bool operator==(const Frame&) const = default;
};

inline Frame MakeFrame(MsgType t, Bytes payload = {}) {
  return {static_cast<std::uint8_t>(t), std::move(payload)};
}

std::size_t WireSize(const Frame& f);
Bytes EncodeFrame(const Frame& f);
// Exactly one complete frame; anything else throws kProtocol.
Frame DecodeFrame(std::span<const std::uint8_t> bytes);

Frame ErrorFrame(ErrorCode code, std::string_view message);

struct ErrorInfo {
  std::uint16_t code = 0;
  std::string message;
};
ErrorInfo ParseErrorFrame(const Frame& f);

// Throws the Error carried by an ERROR frame, or kProtocol when `f` is not
// of type `expected`.
void ExpectType(const Frame& f, MsgType expected);

template <ResidueWord Word>
Frame MakePirQueryFrame(TargetMatrix target, const PirQuery<Word>& q) {
  ByteWriter w;
  w.reserve(5 + sizeof(Word) * static_cast<std::size_t>(q.entries.size()));
  w.put(static_cast<std::uint8_t>(target));
  WriteResidues(w, q.entries);
  return MakeFrame(MsgType::kPirQuery, w.take());
}

template <ResidueWord Word>
Frame MakePirAnswerFrame(const PirAnswer<Word>& a) {
  ByteWriter w;
  w.reserve(4 + sizeof(Word) * static_cast<std::size_t>(a.entries.size()));
  WriteResidues(w, a.entries);
  return MakeFrame(MsgType::kPirAnswer, w.take());
}

template <ResidueWord Word>
PirAnswer<Word> ParsePirAnswer(const Frame& f) {
  ExpectType(f, MsgType::kPirAnswer);
  ByteReader r(f.payload, ErrorCode::kProtocol);
  PirAnswer<Word> a{ReadResidues<Word>(r)};
  if (!r.done()) throw Error(ErrorCode::kProtocol, "trailing bytes in PIR_ANSWER");
  return a;
}

Frame MakeScoreQueryFrame(std::uint32_t cluster_id, const PirQuery<std::uint64_t>& q);
Frame MakeScoreAnswerFrame(const PirAnswer<std::uint64_t>& a);
PirAnswer<std::uint64_t> ParseScoreAnswer(const Frame& f);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_WIRE_HPP_
