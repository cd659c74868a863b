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

#ifndef NFL_FED_MODEL_H_
#define NFL_FED_MODEL_H_

#include <cstdint>
#include <span>
#include <vector>

namespace nfl::fed {

// Global output-layer weights w_round, stored [pre][post] (rows x cols).
struct ModelSnapshot {
  std::uint32_t round = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::int8_t> weights;
  std::uint32_t checksum = 0;

  // Validates shape and the even 8-bit grid, fills in the checksum.
  static ModelSnapshot Make(std::uint32_t round, std::uint32_t rows,
                            std::uint32_t cols,
                            std::vector<std::int8_t> weights);
  static std::uint32_t ComputeChecksum(std::span<const std::int8_t> weights);
  // Throws on any invariant violation, including a stale checksum.
  void Validate() const;

  friend bool operator==(const ModelSnapshot&, const ModelSnapshot&) = default;
};

// w_after - w_before for one client in one round.
struct ModelDelta {
  std::uint32_t client_id = 0;
  std::uint32_t round = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::int16_t> delta;

  friend bool operator==(const ModelDelta&, const ModelDelta&) = default;
};

ModelDelta MakeDelta(std::uint32_t client_id, const ModelSnapshot& before,
                     std::span<const std::int8_t> after);

// Collects one round of deltas against a base snapshot. Rounds are
// synchronous: Finish() refuses to aggregate until every client reported.
class RoundState {
 public:
  RoundState(std::uint32_t expected_clients, ModelSnapshot base);

  // Round the collected deltas belong to (base.round + 1).
  std::uint32_t round() const { return base_.round + 1; }
  const ModelSnapshot& base() const { return base_; }
  std::uint32_t expected_clients() const { return expected_; }
  std::size_t received() const { return received_count_; }
  bool complete() const { return received_count_ == expected_; }
  bool HasClient(std::uint32_t client_id) const;

  // Errors: kDuplicateClient, kRoundMismatch, kShapeMismatch,
  // kInvalidArgument (client id >= expected clients).
  void Submit(const ModelDelta& delta);

  // w_round = even-round(w_base + sum(deltas) / K), clamped to the weight
  // range. Throws kMissingClient if incomplete.
  ModelSnapshot Finish() const;

 private:
  std::uint32_t expected_;
  ModelSnapshot base_;
  std::vector<bool> received_;
  std::size_t received_count_ = 0;
  std::vector<std::int64_t> sum_;
};

// One-shot aggregation of a complete round.
ModelSnapshot Aggregate(const ModelSnapshot& base,
                        std::span<const ModelDelta> deltas,
                        std::uint32_t expected_clients);

}  // namespace nfl::fed

#endif  // NFL_FED_MODEL_H_
