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

#ifndef NFL_SNN_WEIGHT_FILE_H_
#define NFL_SNN_WEIGHT_FILE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nfl/snn/network.h"

namespace nfl::snn {

// Binary weight file, little-endian:
//   "NFW1" | version u16 = 1 | layer_count u16
//   per layer: kind u8 | in h,w,c u16 | out h,w,c u16 | weight_count u32 |
//              weights i8[weight_count]
// Kernel sizes are implied by the shapes. All weights must be even.
inline constexpr std::uint16_t kWeightFileVersion = 1;

std::vector<std::uint8_t> EncodeWeights(const Network& network);
// Errors: kBadMagic, kBadVersion, kUnexpectedEnd, kOddWeight, kShapeMismatch.
std::vector<Layer> DecodeWeights(std::span<const std::uint8_t> bytes);

void SaveWeights(const std::filesystem::path& path, const Network& network);
Network LoadWeights(const std::filesystem::path& path,
                    const NetworkParams& params);
// Loads into an existing topology; the file's shapes must match it exactly.
void LoadWeightsInto(const std::filesystem::path& path, Network& network);

}  // namespace nfl::snn

#endif  // NFL_SNN_WEIGHT_FILE_H_
