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

#include "nfl/fed/server.h"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "nfl/fed/protocol.h"

namespace nfl::fed {

namespace {

using Clock = std::chrono::steady_clock;

constexpr Milliseconds kReaderPoll{100};

struct InboxEvent {
  std::uint32_t client = 0;
  std::vector<std::uint8_t> frame;
  std::optional<Error> error;
};

class Inbox {
 public:
  void Push(InboxEvent event) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      events_.push_back(std::move(event));
    }
    cv_.notify_one();
  }

  std::optional<InboxEvent> Pop(Milliseconds timeout) {
    std::unique_lock<std::mutex> lock(mu_);
    if (!cv_.wait_for(lock, timeout, [&] { return !events_.empty(); })) {
      return std::nullopt;
    }
    auto event = std::move(events_.front());
    events_.pop_front();
    return event;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<InboxEvent> events_;
};

// Owns the accepted connections and their reader threads.
class Session {
 public:
  explicit Session(std::vector<std::unique_ptr<Channel>> channels)
      : channels_(std::move(channels)) {
    for (std::uint32_t k = 0; k < channels_.size(); ++k) {
      readers_.emplace_back([this, k] { ReadLoop(k); });
    }
  }
  ~Session() { Stop(); }

  void Stop() {
    stop_ = true;
    for (auto& t : readers_) {
      if (t.joinable()) t.join();
    }
    for (auto& c : channels_) c->Close();
  }

  std::size_t size() const { return channels_.size(); }
  Channel& channel(std::size_t k) { return *channels_[k]; }
  Inbox& inbox() { return inbox_; }

 private:
  void ReadLoop(std::uint32_t k) {
    while (!stop_) {
      try {
        inbox_.Push({k, channels_[k]->Receive(kReaderPoll), std::nullopt});
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kTimeout) continue;
        inbox_.Push({k, {}, e});
        return;
      }
    }
  }

  std::vector<std::unique_ptr<Channel>> channels_;
  std::vector<std::thread> readers_;
  std::atomic<bool> stop_{false};
  Inbox inbox_;
};

Milliseconds Remaining(Clock::time_point deadline) {
  const auto left =
      std::chrono::duration_cast<Milliseconds>(deadline - Clock::now());
  return left.count() > 0 ? left : Milliseconds(0);
}

void SendAbort(Channel& channel, std::uint32_t client, std::uint32_t round,
               const Error& error) {
  try {
    SendMessage(channel, MakeAbort(client, round, error.code(), error.what()));
  } catch (const Error&) {
    // Peer already gone.
  }
}

}  // namespace

FederationServer::FederationServer(ServerOptions options, ModelSnapshot initial)
    : options_(options) {
  if (options_.num_clients == 0) {
    throw Error(ErrorCode::kInvalidArgument, "server needs >= 1 client");
  }
  initial.Validate();
  history_.push_back(std::move(initial));
}

ModelSnapshot FederationServer::Run(Listener& listener,
                                    const RoundObserver& on_round) {
  history_.resize(1);
  rejected_.clear();
  const std::uint32_t k_clients = options_.num_clients;
  const std::uint32_t rounds = options_.rounds;

  // Handshake.
  std::vector<std::unique_ptr<Channel>> channels(k_clients);
  std::uint32_t connected = 0;
  const auto handshake_deadline = Clock::now() + options_.timeout;
  auto reject = [&](std::unique_ptr<Channel>& channel, std::uint32_t id,
                    const Error& why) {
    SendAbort(*channel, id, 0, why);
    channel->Close();
    rejected_.push_back(why);
  };
  while (connected < k_clients) {
    std::unique_ptr<Channel> channel;
    Message hello;
    try {
      channel = listener.Accept(Remaining(handshake_deadline));
    } catch (const Error&) {
      const Error timeout(ErrorCode::kTimeout,
                          "only " + std::to_string(connected) + " of " +
                              std::to_string(k_clients) +
                              " clients connected before the timeout");
      for (std::uint32_t k = 0; k < k_clients; ++k) {
        if (channels[k]) SendAbort(*channels[k], k, 0, timeout);
      }
      throw timeout;
    }
    try {
      hello = ReceiveMessage(*channel, Remaining(handshake_deadline));
    } catch (const Error& e) {
      reject(channel, 0, e);
      continue;
    }
    const auto id = hello.client_id;
    if (hello.type != MessageType::kHello) {
      reject(channel, id,
             Error(ErrorCode::kBadMessageType, "expected HELLO"));
    } else if (id >= k_clients) {
      reject(channel, id,
             Error(ErrorCode::kInvalidArgument,
                   "client id " + std::to_string(id) + " out of range"));
    } else if (channels[id]) {
      reject(channel, id,
             Error(ErrorCode::kDuplicateClient,
                   "client id " + std::to_string(id) + " already connected"));
    } else {
      try {
        SendMessage(*channel, MakeHelloAck(id, rounds));
        channels[id] = std::move(channel);
        ++connected;
      } catch (const Error& e) {
        reject(channel, id, e);
      }
    }
  }

  Session session(std::move(channels));
  std::vector<std::int64_t> last_delta_round(k_clients, 0);
  ModelSnapshot current = history_.front();
  std::uint32_t round = 0;

  // Clients that acknowledged the final model may hang up.
  std::vector<bool> acked(k_clients, false);
  auto next_event = [&]() {
    std::optional<InboxEvent> event;
    for (;;) {
      event = session.inbox().Pop(options_.timeout);
      if (!event) {
        throw Error(ErrorCode::kTimeout,
                    "no client message within the timeout in round " +
                        std::to_string(round));
      }
      if (!event->error) break;
      if (!acked[event->client]) throw *event->error;
    }
    auto msg = DecodeMessage(event->frame);
    if (msg.type == MessageType::kAbort) {
      throw Error(ErrorCode::kAborted,
                  "client " + std::to_string(event->client) +
                      " aborted: " + ParseAbort(msg).what());
    }
    if (msg.client_id != event->client) {
      throw Error(ErrorCode::kInvalidArgument,
                  "connection of client " + std::to_string(event->client) +
                      " sent a frame for client " +
                      std::to_string(msg.client_id));
    }
    return msg;
  };
  auto check_not_duplicate = [&](const Message& msg) {
    if (msg.type == MessageType::kDelta &&
        static_cast<std::int64_t>(msg.round) <=
            last_delta_round[msg.client_id]) {
      throw Error(ErrorCode::kDuplicateClient,
                  "duplicate DELTA from client " +
                      std::to_string(msg.client_id) + " for round " +
                      std::to_string(msg.round));
    }
  };
  auto broadcast = [&](const ModelSnapshot& snapshot) {
    for (std::uint32_t k = 0; k < k_clients; ++k) {
      const auto frame = EncodeMessage(MakeSnapshotMessage(k, snapshot));
      for (int attempt = 1;; ++attempt) {
        try {
          session.channel(k).Send(frame);
          break;
        } catch (const Error& e) {
          if (attempt >= options_.send_attempts) {
            throw Error(ErrorCode::kTransport,
                        "broadcast to client " + std::to_string(k) +
                            " failed: " + e.what());
          }
        }
      }
    }
  };

  try {
    for (round = 1; round <= rounds; ++round) {
      broadcast(current);
      RoundState state(k_clients, current);
      while (!state.complete()) {
        const auto msg = next_event();
        if (msg.type != MessageType::kDelta) {
          throw Error(ErrorCode::kBadMessageType,
                      "expected DELTA in round " + std::to_string(round));
        }
        check_not_duplicate(msg);
        state.Submit(ParseDelta(msg));
        last_delta_round[msg.client_id] = msg.round;
      }
      current = state.Finish();
      history_.push_back(current);
      if (on_round) on_round(current);
    }
    round = rounds;

    broadcast(current);
    for (std::uint32_t n = 0; n < k_clients;) {
      const auto msg = next_event();
      check_not_duplicate(msg);
      if (msg.type != MessageType::kAck || msg.round != current.round) {
        throw Error(ErrorCode::kBadMessageType,
                    "expected ACK of the final model from client " +
                        std::to_string(msg.client_id));
      }
      if (acked[msg.client_id]) {
        throw Error(ErrorCode::kDuplicateClient,
                    "duplicate ACK from client " +
                        std::to_string(msg.client_id));
      }
      acked[msg.client_id] = true;
      ++n;
    }
  } catch (const Error& e) {
    for (std::uint32_t k = 0; k < k_clients; ++k) {
      SendAbort(session.channel(k), k, round, e);
    }
    session.Stop();
    throw;
  }
  session.Stop();
  return current;
}

void FedConfig::Validate() const {
  if (num_clients < 1) {
    throw Error(ErrorCode::kConfig, "federation.clients must be >= 1");
  }
  if (local_epochs < 0) {
    throw Error(ErrorCode::kConfig, "federation.local_epochs must be >= 0");
  }
  if (transport == TransportKind::kSocket) SocketAddress::Parse(listen);
}

FederationResult RunFederation(const FedConfig& config,
                               const ModelSnapshot& initial,
                               std::span<LocalTrainer* const> trainers,
                               const FederationServer::RoundObserver& on_round) {
  config.Validate();
  if (trainers.size() != config.num_clients) {
    throw Error(ErrorCode::kInvalidArgument,
                "expected " + std::to_string(config.num_clients) +
                    " trainers, got " + std::to_string(trainers.size()));
  }
  for (std::uint32_t k = 0; k < trainers.size(); ++k) {
    if (trainers[k]->client_id() != k) {
      throw Error(ErrorCode::kInvalidArgument,
                  "trainer " + std::to_string(k) + " has client id " +
                      std::to_string(trainers[k]->client_id()));
    }
  }

  FederationServer server(
      ServerOptions{config.num_clients, config.rounds, config.timeout},
      initial);
  std::unique_ptr<Listener> listener;
  std::function<std::unique_ptr<Channel>()> connect;
  if (config.transport == TransportKind::kInProcess) {
    auto hub = std::make_unique<InProcessHub>();
    connect = [h = hub.get()] { return h->Connect(); };
    listener = std::move(hub);
  } else {
    auto socket = std::make_unique<SocketListener>(
        SocketAddress::Parse(config.listen));
    connect = [address = socket->address(), timeout = config.timeout] {
      return ConnectSocket(address, timeout);
    };
    listener = std::move(socket);
  }

  std::vector<std::exception_ptr> client_errors(trainers.size());
  std::vector<std::thread> threads;
  for (std::size_t k = 0; k < trainers.size(); ++k) {
    threads.emplace_back([&, k] {
      try {
        auto channel = connect();
        RunClient(*channel, *trainers[k], ClientOptions{config.timeout});
      } catch (...) {
        client_errors[k] = std::current_exception();
      }
    });
  }

  std::exception_ptr server_error;
  ModelSnapshot final_snapshot;
  try {
    final_snapshot = server.Run(*listener, on_round);
  } catch (...) {
    server_error = std::current_exception();
  }
  for (auto& t : threads) t.join();
  if (server_error) std::rethrow_exception(server_error);
  for (auto& e : client_errors) {
    if (e) std::rethrow_exception(e);
  }
  return {final_snapshot, server.history()};
}

}  // namespace nfl::fed
