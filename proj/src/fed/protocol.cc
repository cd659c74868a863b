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

#include "nfl/fed/protocol.h"

#include <string_view>

#include "nfl/bytes.h"

namespace nfl::fed {

namespace {

constexpr std::string_view kMagic = "NFL1";

[[noreturn]] void BadPayload(const std::string& what) {
  throw Error(ErrorCode::kBadPayload, what);
}

std::pair<std::uint32_t, std::uint32_t> ReadShape(ByteReader& r,
                                                  std::size_t elem_size) {
  const auto rows = r.U32();
  const auto cols = r.U32();
  const auto count = static_cast<std::uint64_t>(rows) * cols;
  if (count * elem_size != r.remaining()) {
    BadPayload("payload length does not match shape " + std::to_string(rows) +
               "x" + std::to_string(cols));
  }
  return {rows, cols};
}

}  // namespace

std::vector<std::uint8_t> EncodeMessage(const Message& message) {
  ByteWriter w;
  w.Raw(kMagic);
  w.U16(message.version);
  w.U8(static_cast<std::uint8_t>(message.type));
  w.U32(message.client_id);
  w.U32(message.round);
  w.U32(static_cast<std::uint32_t>(message.payload.size()));
  w.Raw(message.payload);
  w.U32(Crc32(w.bytes()));
  return w.Take();
}

std::size_t FrameSize(std::span<const std::uint8_t> header) {
  if (header.size() < kHeaderSize) return 0;
  ByteReader r(header);
  if (!r.Expect(kMagic)) return 0;
  r.U16();
  r.U8();
  r.U32();
  r.U32();
  const auto len = r.U32();
  if (len > kMaxPayload) return 0;
  return kHeaderSize + len + kTrailerSize;
}

Message DecodeMessage(std::span<const std::uint8_t> frame) {
  if (frame.size() < kHeaderSize + kTrailerSize) {
    // Still report a foreign magic as such when enough bytes are present.
    if (frame.size() >= kMagic.size()) {
      ByteReader r(frame);
      if (!r.Expect(kMagic)) throw Error(ErrorCode::kBadMagic, "bad magic");
    }
    throw Error(ErrorCode::kUnexpectedEnd, "truncated frame");
  }
  ByteReader r(frame);
  if (!r.Expect(kMagic)) throw Error(ErrorCode::kBadMagic, "bad magic");
  Message m;
  m.version = r.U16();
  if (m.version != kProtocolVersion) {
    throw Error(ErrorCode::kBadVersion,
                "protocol version " + std::to_string(m.version) +
                    " not supported (expected " +
                    std::to_string(kProtocolVersion) + ")");
  }
  const auto type = r.U8();
  m.client_id = r.U32();
  m.round = r.U32();
  const auto len = r.U32();
  if (len > kMaxPayload) BadPayload("payload too large");
  const auto expected = kHeaderSize + std::size_t{len} + kTrailerSize;
  if (frame.size() < expected) {
    throw Error(ErrorCode::kUnexpectedEnd, "truncated frame");
  }
  if (frame.size() > expected) BadPayload("trailing bytes after frame");
  const auto payload = r.Raw(len);
  const auto crc = r.U32();
  if (crc != Crc32(frame.first(kHeaderSize + len))) {
    throw Error(ErrorCode::kBadChecksum, "frame checksum mismatch");
  }
  if (type < static_cast<std::uint8_t>(MessageType::kHello) ||
      type > static_cast<std::uint8_t>(MessageType::kAbort)) {
    throw Error(ErrorCode::kBadMessageType,
                "unknown message type " + std::to_string(type));
  }
  m.type = static_cast<MessageType>(type);
  m.payload.assign(payload.begin(), payload.end());
  return m;
}

Message MakeHello(std::uint32_t client_id) {
  return Message{MessageType::kHello, kProtocolVersion, client_id, 0, {}};
}

Message MakeAck(std::uint32_t client_id, std::uint32_t round) {
  return Message{MessageType::kAck, kProtocolVersion, client_id, round, {}};
}

Message MakeHelloAck(std::uint32_t client_id, std::uint32_t rounds) {
  ByteWriter w;
  w.U32(rounds);
  return Message{MessageType::kAck, kProtocolVersion, client_id, 0, w.Take()};
}

Message MakeAbort(std::uint32_t client_id, std::uint32_t round, ErrorCode code,
                  const std::string& reason) {
  ByteWriter w;
  w.U16(static_cast<std::uint16_t>(code));
  w.Raw(reason);
  return Message{MessageType::kAbort, kProtocolVersion, client_id, round,
                 w.Take()};
}

Message MakeSnapshotMessage(std::uint32_t client_id,
                            const ModelSnapshot& snapshot) {
  ByteWriter w;
  w.U32(snapshot.rows);
  w.U32(snapshot.cols);
  for (auto v : snapshot.weights) w.I8(v);
  return Message{MessageType::kSnapshot, kProtocolVersion, client_id,
                 snapshot.round, w.Take()};
}

Message MakeDeltaMessage(const ModelDelta& delta) {
  ByteWriter w;
  w.U32(delta.rows);
  w.U32(delta.cols);
  for (auto v : delta.delta) w.I16(v);
  return Message{MessageType::kDelta, kProtocolVersion, delta.client_id,
                 delta.round, w.Take()};
}

ModelSnapshot ParseSnapshot(const Message& message) {
  if (message.type != MessageType::kSnapshot) BadPayload("not a SNAPSHOT");
  ByteReader r(message.payload);
  const auto [rows, cols] = ReadShape(r, 1);
  std::vector<std::int8_t> weights(static_cast<std::size_t>(rows) * cols);
  for (auto& v : weights) v = r.I8();
  try {
    return ModelSnapshot::Make(message.round, rows, cols, std::move(weights));
  } catch (const Error& e) {
    BadPayload(std::string("snapshot payload: ") + e.what());
  }
}

ModelDelta ParseDelta(const Message& message) {
  if (message.type != MessageType::kDelta) BadPayload("not a DELTA");
  ByteReader r(message.payload);
  const auto [rows, cols] = ReadShape(r, 2);
  ModelDelta d{message.client_id, message.round, rows, cols, {}};
  d.delta.resize(static_cast<std::size_t>(rows) * cols);
  for (auto& v : d.delta) v = r.I16();
  return d;
}

std::uint32_t ParseHelloAck(const Message& message) {
  if (message.type != MessageType::kAck || message.payload.size() != 4) {
    BadPayload("expected ACK carrying the round count");
  }
  ByteReader r(message.payload);
  return r.U32();
}

Error ParseAbort(const Message& message) {
  if (message.type != MessageType::kAbort || message.payload.size() < 2) {
    BadPayload("malformed ABORT");
  }
  ByteReader r(message.payload);
  auto code = static_cast<ErrorCode>(r.U16());
  if (code > ErrorCode::kConfig) code = ErrorCode::kAborted;
  const auto rest = r.Raw(r.remaining());
  return Error(code, std::string(rest.begin(), rest.end()));
}

}  // namespace nfl::fed
