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

#include "nfl/fed/client.h"

#include <string>

#include "nfl/error.h"

namespace nfl::fed {

ModelSnapshot RunClient(Channel& channel, LocalTrainer& trainer,
                        const ClientOptions& options) {
  const auto id = trainer.client_id();
  SendMessage(channel, MakeHello(id));

  auto reply = ReceiveMessage(channel, options.timeout);
  if (reply.type == MessageType::kAbort) throw ParseAbort(reply);
  const auto rounds = ParseHelloAck(reply);

  std::uint32_t last_round = 0;
  bool seen = false;
  while (true) {
    auto msg = ReceiveMessage(channel, options.timeout);
    if (msg.type == MessageType::kAbort) throw ParseAbort(msg);
    if (msg.type != MessageType::kSnapshot) {
      throw Error(ErrorCode::kBadMessageType,
                  "client expected SNAPSHOT from server");
    }
    auto snapshot = ParseSnapshot(msg);
    if (seen && snapshot.round < last_round) {
      throw Error(ErrorCode::kRoundMismatch,
                  "server snapshot went back to round " +
                      std::to_string(snapshot.round));
    }
    seen = true;
    last_round = snapshot.round;
    if (snapshot.round >= rounds) {
      trainer.Adopt(snapshot);
      SendMessage(channel, MakeAck(id, snapshot.round));
      return snapshot;
    }
    SendMessage(channel, MakeDeltaMessage(trainer.Train(snapshot)));
  }
}

ModelSnapshot SnapshotOf(const snn::Network& network, std::uint32_t round) {
  const auto w = network.output_weights();
  return ModelSnapshot::Make(round, static_cast<std::uint32_t>(network.pre_size()),
                             static_cast<std::uint32_t>(network.num_outputs()),
                             {w.begin(), w.end()});
}

ModelDelta ClientTrain(std::uint32_t client_id, snn::Network& network,
                       plasticity::SoelEngine& engine,
                       std::span<const LabeledFrames> shots, int local_epochs,
                       const ModelSnapshot& global) {
  if (global.rows != network.pre_size() ||
      global.cols != network.num_outputs()) {
    throw Error(ErrorCode::kShapeMismatch,
                "global snapshot " + std::to_string(global.rows) + "x" +
                    std::to_string(global.cols) +
                    " does not match the local plastic layer");
  }
  network.SetOutputWeights(global.weights);
  engine.ResetStats();
  for (int epoch = 0; epoch < local_epochs; ++epoch) {
    for (const auto& shot : shots) {
      plasticity::TrainSample(network, engine, shot.frames, shot.label);
    }
  }
  return MakeDelta(client_id, global, network.output_weights());
}

SoelClient::SoelClient(std::uint32_t client_id, snn::Network network,
                       const plasticity::PlasticityConfig& config,
                       std::vector<LabeledFrames> shots, int local_epochs,
                       std::uint64_t seed)
    : id_(client_id),
      network_(std::move(network)),
      engine_(config, network_.pre_size(), network_.num_outputs(),
              quant::Rng(seed, quant::DeriveStream("client-trace", client_id)),
              quant::Rng(seed, quant::DeriveStream("client-weight", client_id))),
      shots_(std::move(shots)),
      local_epochs_(local_epochs) {
  if (local_epochs_ < 0) {
    throw Error(ErrorCode::kInvalidArgument, "local_epochs must be >= 0");
  }
}

ModelDelta SoelClient::Train(const ModelSnapshot& global) {
  auto delta =
      ClientTrain(id_, network_, engine_, shots_, local_epochs_, global);
  last_round_ = delta.round;
  if (on_trained_) on_trained_(*this, delta);
  return delta;
}

void SoelClient::Adopt(const ModelSnapshot& global) {
  network_.SetOutputWeights(global.weights);
}

}  // namespace nfl::fed
