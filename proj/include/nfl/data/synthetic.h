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

#ifndef NFL_DATA_SYNTHETIC_H_
#define NFL_DATA_SYNTHETIC_H_

#include <cstdint>
#include <string_view>

#include "nfl/data/events.h"

namespace nfl::data {

// Classes 0-7: a bar sweeping outward from near the centre in direction
// k * 45 degrees (0 = right, 2 = up, 4 = left, 6 = down).
// Class 8: bar rotating clockwise about the centre. Class 9: counter-clockwise.
inline constexpr int kNumSyntheticClasses = 10;

std::string_view SyntheticClassName(int label);

struct SyntheticOptions {
  int width = 32;
  int height = 32;
  std::uint32_t duration_us = kDefaultDurationUs;
  // Background noise events per pixel per second.
  double noise_rate_hz = 0.2;
  // Events per second from each pixel the moving bar covers (surface
  // texture), with random polarity.
  double texture_rate_hz = 40.0;
  // Per-subject style (speed, bar size, offset, emission rate) is derived
  // from (style_seed, subject); kNoSubject gives the neutral style.
  int subject = kNoSubject;
  std::uint64_t style_seed = 0;
};

// Deterministic in (label, seed, options).
GestureSample GenerateSynthetic(int label, std::uint64_t seed,
                                const SyntheticOptions& options = {});

}  // namespace nfl::data

#endif  // NFL_DATA_SYNTHETIC_H_
