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

#ifndef NFL_FED_CLIENT_H_
#define NFL_FED_CLIENT_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nfl/fed/model.h"
#include "nfl/fed/transport.h"
#include "nfl/plasticity/engine.h"
#include "nfl/snn/network.h"

namespace nfl::fed {

// The local-learning half of a federation participant.
class LocalTrainer {
 public:
  virtual ~LocalTrainer() = default;

  virtual std::uint32_t client_id() const = 0;
  // Adopts `global` (w_{t-1}) and returns w_t^k - w_{t-1}.
  virtual ModelDelta Train(const ModelSnapshot& global) = 0;
  // Replaces the local plastic weights with the final global model.
  virtual void Adopt(const ModelSnapshot& global) = 0;
};

struct ClientOptions {
  Milliseconds timeout{600'000};
};

// Client side of the protocol: HELLO, then one DELTA per SNAPSHOT until the
// final snapshot, which is adopted and acknowledged. Returns that snapshot.
// A server ABORT is rethrown with the server's error code.
ModelSnapshot RunClient(Channel& channel, LocalTrainer& trainer,
                        const ClientOptions& options = {});

struct LabeledFrames {
  snn::SpikeFrames frames;
  std::size_t label = 0;  // output neuron index
};

// Snapshot of a network's plastic layer.
ModelSnapshot SnapshotOf(const snn::Network& network, std::uint32_t round);

// Loads `global` into the plastic layer, presents every shot once per local
// epoch with SOEL learning, and returns the weight change.
ModelDelta ClientTrain(std::uint32_t client_id, snn::Network& network,
                       plasticity::SoelEngine& engine,
                       std::span<const LabeledFrames> shots, int local_epochs,
                       const ModelSnapshot& global);

class SoelClient : public LocalTrainer {
 public:
  // Called after each local training pass, on the training thread.
  using TrainedHook = std::function<void(const SoelClient& client,
                                         const ModelDelta& delta)>;

  // Trace and weight rounding streams derive from (seed, client id).
  SoelClient(std::uint32_t client_id, snn::Network network,
             const plasticity::PlasticityConfig& config,
             std::vector<LabeledFrames> shots, int local_epochs,
             std::uint64_t seed);

  std::uint32_t client_id() const override { return id_; }
  ModelDelta Train(const ModelSnapshot& global) override;
  void Adopt(const ModelSnapshot& global) override;

  void set_on_trained(TrainedHook hook) { on_trained_ = std::move(hook); }
  const snn::Network& network() const { return network_; }
  // Stats of the most recent Train call.
  const plasticity::TrainingStats& last_stats() const { return engine_.stats(); }
  std::uint32_t last_round() const { return last_round_; }

 private:
  std::uint32_t id_;
  snn::Network network_;
  plasticity::SoelEngine engine_;
  std::vector<LabeledFrames> shots_;
  int local_epochs_;
  std::uint32_t last_round_ = 0;
  TrainedHook on_trained_;
};

}  // namespace nfl::fed

#endif  // NFL_FED_CLIENT_H_
