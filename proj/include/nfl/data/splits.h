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

#ifndef NFL_DATA_SPLITS_H_
#define NFL_DATA_SPLITS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nfl::data {

struct SampleInfo {
  int label = 0;
  int subject = -1;  // negative when unknown
};

struct SplitParams {
  int num_clients = 5;
  std::vector<int> novel_classes;
  int shots_per_class = 1;
  int test_size = 100;
  std::uint64_t seed = 0;
  // Share of subjects (highest ids) held out for testing when subject
  // metadata exists. Mirrors a 23/6 train/test subject split.
  double test_subject_fraction = 6.0 / 29.0;
};

// D_k for each client: indices into the sample pool, ordered by class.
struct ShotAssignment {
  std::vector<std::vector<std::size_t>> client_samples;
};

struct Splits {
  ShotAssignment shots;
  std::vector<std::size_t> test;  // shared held-out set
};

// With subject metadata, train and test subjects are disjoint and each
// client draws its shots from its own subject when there are enough train
// subjects. Without it the split is sample-disjoint. The test set cycles
// through the novel classes to stay balanced.
// Throws Error(kInsufficientSamples) when the pool cannot satisfy the request.
Splits MakeSplits(std::span<const SampleInfo> pool, const SplitParams& params);

}  // namespace nfl::data

#endif  // NFL_DATA_SPLITS_H_
