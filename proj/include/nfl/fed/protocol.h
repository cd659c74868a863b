// Copyright 2026 The Neuromorphic Federated Learning Authors
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

#ifndef NFL_FED_PROTOCOL_H_
#define NFL_FED_PROTOCOL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nfl/error.h"
#include "nfl/fed/model.h"

namespace nfl::fed {

// Frame layout, little-endian:
//   "NFL1" | version u16 | type u8 | client_id u32 | round u32 |
//   payload_len u32 | payload | crc32 u32 (over header and payload)
//
// Payloads:
//   HELLO     empty
//   ACK       empty, or rounds u32 when answering HELLO
//   SNAPSHOT  rows u32 | cols u32 | i8[rows * cols]
//   DELTA     rows u32 | cols u32 | i16[rows * cols]
//   ABORT     error code u16 | reason (UTF-8, rest of payload)
enum class MessageType : std::uint8_t {
  kHello = 0x01,
  kSnapshot = 0x02,
  kDelta = 0x03,
  kAck = 0x04,
  kAbort = 0x05,
};

inline constexpr std::uint16_t kProtocolVersion = 1;
inline constexpr std::size_t kHeaderSize = 19;
inline constexpr std::size_t kTrailerSize = 4;
inline constexpr std::uint32_t kMaxPayload = 64u << 20;

struct Message {
  MessageType type = MessageType::kHello;
  std::uint16_t version = kProtocolVersion;
  std::uint32_t client_id = 0;
  std::uint32_t round = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Message&, const Message&) = default;
};

std::vector<std::uint8_t> EncodeMessage(const Message& message);

// Decodes exactly one frame. Errors, checked in this order:
//   kUnexpectedEnd (truncated), kBadMagic, kBadVersion, kBadPayload
//   (oversized or trailing bytes), kBadChecksum, kBadMessageType.
Message DecodeMessage(std::span<const std::uint8_t> frame);

// Total frame size announced by a header, or 0 if the header is not ours.
std::size_t FrameSize(std::span<const std::uint8_t> header);

Message MakeHello(std::uint32_t client_id);
Message MakeAck(std::uint32_t client_id, std::uint32_t round);
Message MakeHelloAck(std::uint32_t client_id, std::uint32_t rounds);
Message MakeAbort(std::uint32_t client_id, std::uint32_t round, ErrorCode code,
                  const std::string& reason);
Message MakeSnapshotMessage(std::uint32_t client_id,
                            const ModelSnapshot& snapshot);
Message MakeDeltaMessage(const ModelDelta& delta);

// Payload parsers; all throw kBadPayload on malformed content.
ModelSnapshot ParseSnapshot(const Message& message);
ModelDelta ParseDelta(const Message& message);
std::uint32_t ParseHelloAck(const Message& message);
Error ParseAbort(const Message& message);

}  // namespace nfl::fed

#endif  // NFL_FED_PROTOCOL_H_
