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

#include "nfl/fed/model.h"

#include <string>

#include "nfl/bytes.h"
#include "nfl/error.h"
#include "nfl/quant.h"

namespace nfl::fed {

namespace {

void CheckEvenWeights(std::span<const std::int8_t> weights) {
  const auto spec = quant::QuantSpec::Weight();
  for (auto w : weights) {
    if (!spec.Contains(w)) {
      throw Error(ErrorCode::kOddWeight,
                  "snapshot weight " + std::to_string(int{w}) +
                      " is off the even 8-bit grid");
    }
  }
}

}  // namespace

std::uint32_t ModelSnapshot::ComputeChecksum(
    std::span<const std::int8_t> weights) {
  return Crc32({reinterpret_cast<const std::uint8_t*>(weights.data()),
                weights.size()});
}

ModelSnapshot ModelSnapshot::Make(std::uint32_t round, std::uint32_t rows,
                                  std::uint32_t cols,
                                  std::vector<std::int8_t> weights) {
  ModelSnapshot s{round, rows, cols, std::move(weights), 0};
  if (s.weights.size() != static_cast<std::size_t>(rows) * cols) {
    throw Error(ErrorCode::kShapeMismatch, "snapshot size does not match " +
                                               std::to_string(rows) + "x" +
                                               std::to_string(cols));
  }
  CheckEvenWeights(s.weights);
  s.checksum = ComputeChecksum(s.weights);
  return s;
}

void ModelSnapshot::Validate() const {
  if (weights.size() != static_cast<std::size_t>(rows) * cols) {
    throw Error(ErrorCode::kShapeMismatch, "snapshot size mismatch");
  }
  CheckEvenWeights(weights);
  if (ComputeChecksum(weights) != checksum) {
    throw Error(ErrorCode::kBadChecksum, "snapshot checksum mismatch");
  }
}

ModelDelta MakeDelta(std::uint32_t client_id, const ModelSnapshot& before,
                     std::span<const std::int8_t> after) {
  if (after.size() != before.weights.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "local weights do not match the snapshot shape");
  }
  ModelDelta d{client_id, before.round + 1, before.rows, before.cols, {}};
  d.delta.resize(after.size());
  for (std::size_t i = 0; i < after.size(); ++i) {
    d.delta[i] = static_cast<std::int16_t>(after[i] - before.weights[i]);
  }
  return d;
}

RoundState::RoundState(std::uint32_t expected_clients, ModelSnapshot base)
    : expected_(expected_clients),
      base_(std::move(base)),
      received_(expected_clients, false),
      sum_(base_.weights.size(), 0) {
  if (expected_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "a round needs >= 1 client");
  }
  base_.Validate();
}

bool RoundState::HasClient(std::uint32_t client_id) const {
  return client_id < expected_ && received_[client_id];
}

void RoundState::Submit(const ModelDelta& delta) {
  if (delta.client_id >= expected_) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown client " + std::to_string(delta.client_id));
  }
  if (received_[delta.client_id]) {
    throw Error(ErrorCode::kDuplicateClient,
                "duplicate delta from client " +
                    std::to_string(delta.client_id) + " in round " +
                    std::to_string(round()));
  }
  if (delta.round != round()) {
    throw Error(ErrorCode::kRoundMismatch,
                "delta for round " + std::to_string(delta.round) +
                    " submitted to round " + std::to_string(round()));
  }
  if (delta.rows != base_.rows || delta.cols != base_.cols ||
      delta.delta.size() != sum_.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "delta shape does not match the global model");
  }
  for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += delta.delta[i];
  received_[delta.client_id] = true;
  ++received_count_;
}

ModelSnapshot RoundState::Finish() const {
  if (!complete()) {
    throw Error(ErrorCode::kMissingClient,
                "round " + std::to_string(round()) + " has " +
                    std::to_string(received_count_) + " of " +
                    std::to_string(expected_) + " deltas");
  }
  const auto spec = quant::QuantSpec::Weight();
  const auto k = static_cast<std::int64_t>(expected_);
  std::vector<std::int8_t> next(sum_.size());
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    // mean of client models = (K * w + sum) / K, rounded exactly.
    const auto even =
        quant::RoundNearestEvenRatio(k * base_.weights[i] + sum_[i], k);
    next[i] = static_cast<std::int8_t>(quant::ClampToSpec(even, spec));
  }
  return ModelSnapshot::Make(round(), base_.rows, base_.cols, std::move(next));
}

ModelSnapshot Aggregate(const ModelSnapshot& base,
                        std::span<const ModelDelta> deltas,
                        std::uint32_t expected_clients) {
  RoundState state(expected_clients, base);
  for (const auto& d : deltas) state.Submit(d);
  return state.Finish();
}

}  // namespace nfl::fed
