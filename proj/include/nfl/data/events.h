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

#ifndef NFL_DATA_EVENTS_H_
#define NFL_DATA_EVENTS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nfl/snn/network.h"

namespace nfl::data {

inline constexpr std::uint32_t kDefaultDurationUs = 1'450'000;
inline constexpr int kNoSubject = -1;

struct EventRecord {
  std::uint32_t timestamp_us = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint8_t polarity = 0;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct GestureSample {
  int width = 32;
  int height = 32;
  int label = 0;
  int subject = kNoSubject;
  std::uint32_t duration_us = kDefaultDurationUs;
  std::vector<EventRecord> events;

  friend bool operator==(const GestureSample&, const GestureSample&) = default;
};

// Coordinates in bounds, polarity in {0, 1}, timestamps non-decreasing.
void ValidateSample(const GestureSample& sample);

// Event file, little-endian:
//   "NFEV" | version u16 = 1 | width u16 | height u16 | class_label u16 |
//   subject u16 | event_count u32 | events (timestamp_us u32, x u16, y u16,
//   polarity u8)
// Subject 0xFFFF stands for "unknown". Duration is not stored; reads get
// the default 1.45 s window.
inline constexpr std::uint16_t kEventFileVersion = 1;

std::vector<std::uint8_t> EncodeEvents(const GestureSample& sample);
GestureSample DecodeEvents(std::span<const std::uint8_t> bytes);
void WriteEvents(const std::filesystem::path& path, const GestureSample& sample);
GestureSample ReadEvents(const std::filesystem::path& path);

// Bins events into binary frames of dt_us: an event at t lands in step
// floor(t / dt_us); duplicates within a (step, x, y, polarity) cell collapse
// to one spike; the tensor has ceil(duration / dt_us) steps and events past
// the duration are dropped. Frame shape is height x width x 2 with polarity
// as the channel.
snn::SpikeFrames BinEvents(const GestureSample& sample, std::uint32_t dt_us);

}  // namespace nfl::data

#endif  // NFL_DATA_EVENTS_H_
