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

#ifndef NFL_FED_TRANSPORT_H_
#define NFL_FED_TRANSPORT_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nfl/fed/protocol.h"

namespace nfl::fed {

using Milliseconds = std::chrono::milliseconds;

// Bidirectional frame pipe between one client and the server.
class Channel {
 public:
  virtual ~Channel() = default;

  // Throws Error(kTransport) if the peer is gone.
  virtual void Send(std::span<const std::uint8_t> frame) = 0;
  // Returns the next frame (possibly malformed; decoding is the caller's
  // job). Throws Error(kTimeout) when nothing arrives in time and
  // Error(kTransport) when the peer closed at a frame boundary.
  virtual std::vector<std::uint8_t> Receive(Milliseconds timeout) = 0;
  virtual void Close() = 0;
};

void SendMessage(Channel& channel, const Message& message);
// Receive + DecodeMessage.
Message ReceiveMessage(Channel& channel, Milliseconds timeout);

class Listener {
 public:
  virtual ~Listener() = default;
  // Throws Error(kTimeout) if no client connects in time.
  virtual std::unique_ptr<Channel> Accept(Milliseconds timeout) = 0;
};

// Unbounded in-memory frame queue pair.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>>
MakeInProcessPair();

class InProcessHub : public Listener {
 public:
  // Client side of a new connection; the server side is queued for Accept.
  std::unique_ptr<Channel> Connect();
  std::unique_ptr<Channel> Accept(Milliseconds timeout) override;

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::unique_ptr<Channel>> pending_;
};

// "host:port" with a numeric IPv4 host or "localhost".
struct SocketAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  static SocketAddress Parse(const std::string& text);
  std::string ToString() const;
};

class SocketListener : public Listener {
 public:
  // Port 0 picks an ephemeral port; see address().
  explicit SocketListener(const SocketAddress& address);
  ~SocketListener() override;
  SocketListener(const SocketListener&) = delete;
  SocketListener& operator=(const SocketListener&) = delete;

  const SocketAddress& address() const { return address_; }
  std::unique_ptr<Channel> Accept(Milliseconds timeout) override;

 private:
  int fd_ = -1;
  SocketAddress address_;
};

// Retries refused connections until `timeout` elapses.
std::unique_ptr<Channel> ConnectSocket(const SocketAddress& address,
                                       Milliseconds timeout);

}  // namespace nfl::fed

#endif  // NFL_FED_TRANSPORT_H_
