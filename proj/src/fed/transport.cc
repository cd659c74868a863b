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

#include "nfl/fed/transport.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "nfl/error.h"

namespace nfl::fed {

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void TransportError(const std::string& what) {
  throw Error(ErrorCode::kTransport, what);
}

int RemainingMs(Clock::time_point deadline) {
  const auto left =
      std::chrono::duration_cast<Milliseconds>(deadline - Clock::now()).count();
  return left <= 0 ? 0 : static_cast<int>(std::min<long long>(left, 1 << 30));
}

// Shared state of an in-process connection; side 0 is the client.
struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<std::uint8_t>> inbox[2];
  bool closed[2] = {false, false};
};

class InProcessChannel : public Channel {
 public:
  InProcessChannel(std::shared_ptr<Pipe> pipe, int side)
      : pipe_(std::move(pipe)), side_(side) {}
  ~InProcessChannel() override { Close(); }

  void Send(std::span<const std::uint8_t> frame) override {
    std::lock_guard<std::mutex> lock(pipe_->mu);
    if (pipe_->closed[side_] || pipe_->closed[1 - side_]) {
      TransportError("in-process peer disconnected");
    }
    pipe_->inbox[1 - side_].emplace_back(frame.begin(), frame.end());
    pipe_->cv.notify_all();
  }

  std::vector<std::uint8_t> Receive(Milliseconds timeout) override {
    std::unique_lock<std::mutex> lock(pipe_->mu);
    auto& inbox = pipe_->inbox[side_];
    const bool ready = pipe_->cv.wait_for(lock, timeout, [&] {
      return !inbox.empty() || pipe_->closed[1 - side_] || pipe_->closed[side_];
    });
    if (!inbox.empty()) {
      auto frame = std::move(inbox.front());
      inbox.pop_front();
      return frame;
    }
    if (ready) TransportError("in-process peer disconnected");
    throw Error(ErrorCode::kTimeout, "receive timed out");
  }

  void Close() override {
    std::lock_guard<std::mutex> lock(pipe_->mu);
    pipe_->closed[side_] = true;
    pipe_->cv.notify_all();
  }

 private:
  std::shared_ptr<Pipe> pipe_;
  int side_;
};

class SocketChannel : public Channel {
 public:
  explicit SocketChannel(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~SocketChannel() override { Close(); }

  void Send(std::span<const std::uint8_t> frame) override {
    if (fd_ < 0) TransportError("socket closed");
    std::size_t sent = 0;
    while (sent < frame.size()) {
      const auto n = ::send(fd_, frame.data() + sent, frame.size() - sent,
                            MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        TransportError(std::string("send failed: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::vector<std::uint8_t> Receive(Milliseconds timeout) override {
    if (fd_ < 0) TransportError("socket closed");
    const auto deadline = Clock::now() + timeout;
    std::uint8_t buf[65536];
    while (true) {
      std::size_t need = kHeaderSize;
      if (pending_.size() >= kHeaderSize) {
        need = FrameSize(pending_);
        // Not a frame we can size: hand over what we have for decoding.
        if (need == 0) return TakePending(pending_.size());
      }
      if (pending_.size() >= need) return TakePending(need);

      pollfd pfd{fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, RemainingMs(deadline));
      if (ready < 0) {
        if (errno == EINTR) continue;
        TransportError(std::string("poll failed: ") + std::strerror(errno));
      }
      if (ready == 0) throw Error(ErrorCode::kTimeout, "receive timed out");
      const auto want = std::min(need - pending_.size(), sizeof(buf));
      const auto n = ::recv(fd_, buf, want, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        TransportError(std::string("recv failed: ") + std::strerror(errno));
      }
      if (n == 0) {
        if (pending_.empty()) TransportError("peer closed the connection");
        return TakePending(pending_.size());  // truncated frame
      }
      pending_.insert(pending_.end(), buf, buf + n);
    }
  }

  void Close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  std::vector<std::uint8_t> TakePending(std::size_t n) {
    std::vector<std::uint8_t> out(pending_.begin(), pending_.begin() + n);
    pending_.erase(pending_.begin(), pending_.begin() + n);
    return out;
  }

  int fd_;
  std::vector<std::uint8_t> pending_;
};

sockaddr_in ToSockaddr(const SocketAddress& address) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(address.port);
  const std::string host =
      address.host == "localhost" ? "127.0.0.1" : address.host;
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw Error(ErrorCode::kInvalidArgument, "bad IPv4 host '" + host + "'");
  }
  return addr;
}

}  // namespace

void SendMessage(Channel& channel, const Message& message) {
  channel.Send(EncodeMessage(message));
}

Message ReceiveMessage(Channel& channel, Milliseconds timeout) {
  return DecodeMessage(channel.Receive(timeout));
}

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>>
MakeInProcessPair() {
  auto pipe = std::make_shared<Pipe>();
  return {std::make_unique<InProcessChannel>(pipe, 0),
          std::make_unique<InProcessChannel>(pipe, 1)};
}

std::unique_ptr<Channel> InProcessHub::Connect() {
  auto [client, server] = MakeInProcessPair();
  {
    std::lock_guard<std::mutex> lock(mu_);
    pending_.push_back(std::move(server));
  }
  cv_.notify_all();
  return std::move(client);
}

std::unique_ptr<Channel> InProcessHub::Accept(Milliseconds timeout) {
  std::unique_lock<std::mutex> lock(mu_);
  if (!cv_.wait_for(lock, timeout, [&] { return !pending_.empty(); })) {
    throw Error(ErrorCode::kTimeout, "no client connected in time");
  }
  auto channel = std::move(pending_.front());
  pending_.pop_front();
  return channel;
}

SocketAddress SocketAddress::Parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "address must be host:port, got '" + text + "'");
  }
  SocketAddress addr;
  addr.host = text.substr(0, colon);
  try {
    const auto port = std::stoul(text.substr(colon + 1));
    if (port > 65535) throw std::out_of_range("port");
    addr.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "bad port in '" + text + "'");
  }
  ToSockaddr(addr);
  return addr;
}

std::string SocketAddress::ToString() const {
  return host + ":" + std::to_string(port);
}

SocketListener::SocketListener(const SocketAddress& address)
    : address_(address) {
  const auto addr = ToSockaddr(address);
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) TransportError("socket() failed");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd_, 64) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd_);
    fd_ = -1;
    TransportError("cannot listen on " + address.ToString() + ": " + why);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  address_.port = ntohs(bound.sin_port);
}

SocketListener::~SocketListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Channel> SocketListener::Accept(Milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  while (true) {
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, RemainingMs(deadline));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) {
      throw Error(ErrorCode::kTimeout, "no client connected in time");
    }
    const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      TransportError(std::string("accept failed: ") + std::strerror(errno));
    }
    return std::make_unique<SocketChannel>(fd);
  }
}

std::unique_ptr<Channel> ConnectSocket(const SocketAddress& address,
                                       Milliseconds timeout) {
  const auto addr = ToSockaddr(address);
  const auto deadline = Clock::now() + timeout;
  while (true) {
    const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) TransportError("socket() failed");
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) ==
        0) {
      return std::make_unique<SocketChannel>(fd);
    }
    const int err = errno;
    ::close(fd);
    if (err != ECONNREFUSED && err != EINTR) {
      TransportError("connect to " + address.ToString() +
                     " failed: " + std::strerror(err));
    }
    if (Clock::now() >= deadline) {
      TransportError("connection refused by " + address.ToString());
    }
    std::this_thread::sleep_for(Milliseconds(50));
  }
}

}  // namespace nfl::fed
