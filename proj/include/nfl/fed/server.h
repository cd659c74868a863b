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

#ifndef NFL_FED_SERVER_H_
#define NFL_FED_SERVER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nfl/error.h"
#include "nfl/fed/client.h"
#include "nfl/fed/model.h"
#include "nfl/fed/transport.h"

namespace nfl::fed {

struct ServerOptions {
  std::uint32_t num_clients = 5;
  std::uint32_t rounds = 8;
  // Bounds the handshake and every wait for a client message.
  Milliseconds timeout{600'000};
  int send_attempts = 3;
};

// Coordinator for synchronous federated averaging. Each accepted connection
// gets a reader thread feeding one inbox; all round state lives on the
// thread that calls Run().
class FederationServer {
 public:
  using RoundObserver = std::function<void(const ModelSnapshot&)>;

  FederationServer(ServerOptions options, ModelSnapshot initial);

  // Accepts num_clients valid HELLOs (rejecting malformed or duplicate ones),
  // runs every round, broadcasts the final model and waits for each ACK.
  // On failure every connected client gets ABORT and the error is rethrown;
  // history() then holds the rounds completed so far.
  ModelSnapshot Run(Listener& listener, const RoundObserver& on_round = {});

  // w_0 .. w_t for every completed round t.
  const std::vector<ModelSnapshot>& history() const { return history_; }
  // Connections refused during the handshake, with the reason.
  const std::vector<Error>& rejected() const { return rejected_; }

 private:
  ServerOptions options_;
  std::vector<ModelSnapshot> history_;
  std::vector<Error> rejected_;
};

enum class TransportKind { kInProcess, kSocket };

struct FedConfig {
  std::uint32_t num_clients = 5;
  std::uint32_t rounds = 8;
  int local_epochs = 1;
  TransportKind transport = TransportKind::kInProcess;
  std::string listen = "127.0.0.1:0";
  Milliseconds timeout{600'000};

  void Validate() const;
};

struct FederationResult {
  ModelSnapshot final_snapshot;
  std::vector<ModelSnapshot> history;
};

// Runs the server on the calling thread and one thread per trainer,
// connected through the configured transport. trainers[k] must have
// client_id() == k.
FederationResult RunFederation(const FedConfig& config,
                               const ModelSnapshot& initial,
                               std::span<LocalTrainer* const> trainers,
                               const FederationServer::RoundObserver& on_round = {});

}  // namespace nfl::fed

#endif  // NFL_FED_SERVER_H_
