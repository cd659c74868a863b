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

#include "nfl/data/events.h"

#include <string>

#include "nfl/bytes.h"
#include "nfl/error.h"

namespace nfl::data {

namespace {

constexpr std::string_view kMagic = "NFEV";
constexpr std::uint16_t kUnknownSubject = 0xFFFF;

}  // namespace

void ValidateSample(const GestureSample& sample) {
  if (sample.width <= 0 || sample.height <= 0 || sample.width > 0xFFFF ||
      sample.height > 0xFFFF) {
    throw Error(ErrorCode::kInvalidArgument, "bad sensor size");
  }
  std::uint32_t last = 0;
  for (std::size_t i = 0; i < sample.events.size(); ++i) {
    const auto& e = sample.events[i];
    if (e.x >= sample.width || e.y >= sample.height) {
      throw Error(ErrorCode::kOutOfBounds,
                  "event " + std::to_string(i) + " at (" +
                      std::to_string(e.x) + ", " + std::to_string(e.y) +
                      ") outside " + std::to_string(sample.width) + "x" +
                      std::to_string(sample.height) + " sensor");
    }
    if (e.polarity > 1) {
      throw Error(ErrorCode::kOutOfBounds,
                  "event " + std::to_string(i) + " has polarity " +
                      std::to_string(e.polarity));
    }
    if (e.timestamp_us < last) {
      throw Error(ErrorCode::kNonMonotonicTimestamp,
                  "event " + std::to_string(i) + " timestamp goes backwards");
    }
    last = e.timestamp_us;
  }
}

std::vector<std::uint8_t> EncodeEvents(const GestureSample& sample) {
  ValidateSample(sample);
  ByteWriter w;
  w.Raw(kMagic);
  w.U16(kEventFileVersion);
  w.U16(static_cast<std::uint16_t>(sample.width));
  w.U16(static_cast<std::uint16_t>(sample.height));
  w.U16(static_cast<std::uint16_t>(sample.label));
  w.U16(sample.subject < 0 ? kUnknownSubject
                           : static_cast<std::uint16_t>(sample.subject));
  w.U32(static_cast<std::uint32_t>(sample.events.size()));
  for (const auto& e : sample.events) {
    w.U32(e.timestamp_us);
    w.U16(e.x);
    w.U16(e.y);
    w.U8(e.polarity);
  }
  return w.Take();
}

GestureSample DecodeEvents(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (!r.Expect(kMagic)) {
    throw Error(ErrorCode::kBadMagic, "bad magic: not an event file");
  }
  if (const auto version = r.U16(); version != kEventFileVersion) {
    throw Error(ErrorCode::kBadVersion,
                "unsupported event file version " + std::to_string(version));
  }
  GestureSample sample;
  sample.width = r.U16();
  sample.height = r.U16();
  sample.label = r.U16();
  const auto subject = r.U16();
  sample.subject = subject == kUnknownSubject ? kNoSubject : subject;
  const auto count = r.U32();
  if (r.remaining() / 9 < count) {
    throw Error(ErrorCode::kUnexpectedEnd, "unexpected end of event data");
  }
  sample.events.resize(count);
  for (auto& e : sample.events) {
    e.timestamp_us = r.U32();
    e.x = r.U16();
    e.y = r.U16();
    e.polarity = r.U8();
  }
  ValidateSample(sample);
  return sample;
}

void WriteEvents(const std::filesystem::path& path,
                 const GestureSample& sample) {
  WriteFileBytes(path, EncodeEvents(sample));
}

GestureSample ReadEvents(const std::filesystem::path& path) {
  return DecodeEvents(ReadFileBytes(path));
}

snn::SpikeFrames BinEvents(const GestureSample& sample, std::uint32_t dt_us) {
  if (dt_us == 0) {
    throw Error(ErrorCode::kInvalidArgument, "dt_us must be > 0");
  }
  const snn::Shape3 shape{sample.height, sample.width, 2};
  const std::size_t steps = (sample.duration_us + dt_us - 1) / dt_us;
  snn::SpikeFrames frames(shape, steps);
  for (const auto& e : sample.events) {
    if (e.timestamp_us >= sample.duration_us) continue;
    if (e.x >= sample.width || e.y >= sample.height || e.polarity > 1) {
      throw Error(ErrorCode::kOutOfBounds, "event outside sensor");
    }
    frames.Add(e.timestamp_us / dt_us,
               static_cast<std::uint32_t>(shape.Index(e.y, e.x, e.polarity)));
  }
  frames.Finalize();
  return frames;
}

}  // namespace nfl::data
