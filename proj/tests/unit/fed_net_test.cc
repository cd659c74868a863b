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

#include <gtest/gtest.h>

#include <atomic>
#include <functional>
#include <optional>
#include <thread>

#include "nfl/error.h"
#include "nfl/fed/client.h"
#include "nfl/fed/model.h"
#include "nfl/fed/protocol.h"
#include "nfl/fed/server.h"
#include "nfl/fed/transport.h"
#include "nfl/plasticity/engine.h"

namespace nfl::fed {
namespace {

using namespace std::chrono_literals;

std::optional<ErrorCode> CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Every client pushes weight 0 up by 2; client k also nudges weight k+1.
class FakeTrainer : public LocalTrainer {
 public:
  explicit FakeTrainer(std::uint32_t id) : id_(id) {}
  std::uint32_t client_id() const override { return id_; }
  ModelDelta Train(const ModelSnapshot& global) override {
    ++train_calls;
    std::vector<std::int16_t> d(global.weights.size(), 0);
    d[0] = 2;
    d[1 + id_ % (d.size() - 1)] = 2;
    return ModelDelta{id_, global.round + 1, global.rows, global.cols, d};
  }
  void Adopt(const ModelSnapshot& global) override { adopted = global; }

  int train_calls = 0;
  std::optional<ModelSnapshot> adopted;

 private:
  std::uint32_t id_;
};

ModelSnapshot Zero(std::uint32_t n = 8) {
  return ModelSnapshot::Make(0, n, 1, std::vector<std::int8_t>(n, 0));
}

TEST(InProcessTransportTest, PairDeliversInOrder) {
  auto [a, b] = MakeInProcessPair();
  SendMessage(*a, MakeHello(1));
  SendMessage(*a, MakeAck(1, 2));
  EXPECT_EQ(ReceiveMessage(*b, 1s), MakeHello(1));
  EXPECT_EQ(ReceiveMessage(*b, 1s), MakeAck(1, 2));
  EXPECT_EQ(CodeOf([&] { b->Receive(20ms); }), ErrorCode::kTimeout);
  a->Close();
  EXPECT_EQ(CodeOf([&] { b->Receive(20ms); }), ErrorCode::kTransport);
  EXPECT_EQ(CodeOf([&] { b->Send(EncodeMessage(MakeHello(0))); }),
            ErrorCode::kTransport);
}

TEST(InProcessTransportTest, HubAccept) {
  InProcessHub hub;
  EXPECT_EQ(CodeOf([&] { hub.Accept(10ms); }), ErrorCode::kTimeout);
  auto client = hub.Connect();
  auto server = hub.Accept(1s);
  SendMessage(*client, MakeHello(4));
  EXPECT_EQ(ReceiveMessage(*server, 1s).client_id, 4u);
}

TEST(SocketTransportTest, FramesCrossTheWire) {
  SocketListener listener(SocketAddress::Parse("127.0.0.1:0"));
  ASSERT_NE(listener.address().port, 0);
  auto client = ConnectSocket(listener.address(), 2s);
  auto server = listener.Accept(2s);
  std::vector<std::int8_t> big(300 * 1000, 2);
  const auto snap = ModelSnapshot::Make(3, 300, 1000, big);
  SendMessage(*server, MakeSnapshotMessage(0, snap));
  SendMessage(*client, MakeHello(2));
  EXPECT_EQ(ParseSnapshot(ReceiveMessage(*client, 2s)), snap);
  EXPECT_EQ(ReceiveMessage(*server, 2s), MakeHello(2));
  EXPECT_EQ(CodeOf([&] { server->Receive(20ms); }), ErrorCode::kTimeout);
  client->Close();
  EXPECT_EQ(CodeOf([&] { server->Receive(1s); }), ErrorCode::kTransport);
}

TEST(SocketTransportTest, AddressParsing) {
  const auto a = SocketAddress::Parse("10.1.2.3:4567");
  EXPECT_EQ(a.host, "10.1.2.3");
  EXPECT_EQ(a.port, 4567);
  EXPECT_EQ(a.ToString(), "10.1.2.3:4567");
  EXPECT_TRUE(CodeOf([] { SocketAddress::Parse("nope"); }).has_value());
  EXPECT_TRUE(CodeOf([] { SocketAddress::Parse("1.2.3.4:99999"); }).has_value());
}

FederationResult RunFakes(std::uint32_t k, std::uint32_t rounds,
                          TransportKind transport,
                          std::vector<FakeTrainer>* out = nullptr,
                          int* observed = nullptr) {
  std::vector<FakeTrainer> trainers;
  for (std::uint32_t i = 0; i < k; ++i) trainers.emplace_back(i);
  std::vector<LocalTrainer*> ptrs;
  for (auto& t : trainers) ptrs.push_back(&t);
  FedConfig cfg;
  cfg.num_clients = k;
  cfg.rounds = rounds;
  cfg.transport = transport;
  cfg.timeout = 10s;
  auto result = RunFederation(cfg, Zero(), ptrs, [&](const ModelSnapshot&) {
    if (observed) ++*observed;
  });
  if (out) *out = std::move(trainers);
  return result;
}

TEST(FederationTest, EightRoundsFiveClients) {
  std::vector<FakeTrainer> trainers;
  int observed = 0;
  const auto r = RunFakes(5, 8, TransportKind::kInProcess, &trainers, &observed);
  EXPECT_EQ(observed, 8);
  ASSERT_EQ(r.history.size(), 9u);
  for (const auto& t : trainers) {
    EXPECT_EQ(t.train_calls, 8);
    ASSERT_TRUE(t.adopted.has_value());
    EXPECT_EQ(t.adopted->checksum, r.final_snapshot.checksum);
  }
  // weight 0 moves by 2 each round; the per-client nudges average to 0.4.
  EXPECT_EQ(r.final_snapshot.weights[0], 16);
  for (std::size_t i = 1; i < 8; ++i) EXPECT_EQ(r.final_snapshot.weights[i], 0);
  EXPECT_EQ(r.final_snapshot.round, 8u);
}

TEST(FederationTest, ZeroRoundsReturnsInitial) {
  std::vector<FakeTrainer> trainers;
  const auto r = RunFakes(3, 0, TransportKind::kInProcess, &trainers);
  EXPECT_EQ(r.final_snapshot, Zero());
  for (const auto& t : trainers) EXPECT_EQ(t.train_calls, 0);
}

TEST(FederationTest, SocketMatchesInProcess) {
  const auto a = RunFakes(4, 3, TransportKind::kInProcess);
  const auto b = RunFakes(4, 3, TransportKind::kSocket);
  EXPECT_EQ(a.final_snapshot, b.final_snapshot);
  EXPECT_EQ(a.history, b.history);
}

TEST(FederationTest, TrainerCountMustMatch) {
  FakeTrainer t(0);
  std::vector<LocalTrainer*> ptrs = {&t};
  FedConfig cfg;
  cfg.num_clients = 2;
  EXPECT_EQ(CodeOf([&] { RunFederation(cfg, Zero(), ptrs); }),
            ErrorCode::kInvalidArgument);
  cfg.num_clients = 0;
  EXPECT_EQ(CodeOf([&] { RunFederation(cfg, Zero(), ptrs); }), ErrorCode::kConfig);
}

TEST(ServerTest, TimesOutWhenAClientIsMissing) {
  InProcessHub hub;
  ServerOptions opt;
  opt.num_clients = 5;
  opt.rounds = 2;
  opt.timeout = 300ms;
  FederationServer server(opt, Zero());
  std::vector<std::optional<ErrorCode>> client_codes(4);
  std::vector<std::thread> threads;
  for (std::uint32_t k = 0; k < 4; ++k) {
    threads.emplace_back([&, k, ch = hub.Connect()]() mutable {
      FakeTrainer t(k);
      client_codes[k] = CodeOf([&] { RunClient(*ch, t, {2s}); });
    });
  }
  EXPECT_EQ(CodeOf([&] { server.Run(hub); }), ErrorCode::kTimeout);
  for (auto& t : threads) t.join();
  for (const auto& c : client_codes) EXPECT_EQ(c, ErrorCode::kTimeout);
  EXPECT_EQ(server.history().size(), 1u);
}

TEST(ServerTest, RejectsWrongVersionAndDuplicateIds) {
  InProcessHub hub;
  ServerOptions opt;
  opt.num_clients = 2;
  opt.rounds = 1;
  opt.timeout = 5s;
  FederationServer server(opt, Zero());

  auto stale = hub.Connect();
  auto hello = MakeHello(0);
  hello.version = 2;
  stale->Send(EncodeMessage(hello));
  auto dup_a = hub.Connect();
  auto dup_b = hub.Connect();
  auto out_of_range = hub.Connect();

  std::thread runner([&] {
    SendMessage(*dup_a, MakeHello(1));
    SendMessage(*dup_b, MakeHello(1));
    SendMessage(*out_of_range, MakeHello(7));
  });
  std::vector<std::thread> threads;
  std::vector<ModelSnapshot> finals(2);
  runner.join();
  // dup_a holds id 1; drive it by hand after the good client 0 joins.
  auto good = hub.Connect();
  threads.emplace_back([&, ch = std::move(good)]() mutable {
    FakeTrainer t(0);
    finals[0] = RunClient(*ch, t, {5s});
  });
  threads.emplace_back([&] {
    EXPECT_EQ(ParseHelloAck(ReceiveMessage(*dup_a, 5s)), 1u);
    const auto snap = ParseSnapshot(ReceiveMessage(*dup_a, 5s));
    FakeTrainer t(1);
    SendMessage(*dup_a, MakeDeltaMessage(t.Train(snap)));
    finals[1] = ParseSnapshot(ReceiveMessage(*dup_a, 5s));
    SendMessage(*dup_a, MakeAck(1, finals[1].round));
  });
  const auto final = server.Run(hub);
  for (auto& t : threads) t.join();
  EXPECT_EQ(finals[0], final);
  EXPECT_EQ(finals[1], final);

  ASSERT_EQ(server.rejected().size(), 3u);
  EXPECT_EQ(server.rejected()[0].code(), ErrorCode::kBadVersion);
  EXPECT_EQ(server.rejected()[1].code(), ErrorCode::kDuplicateClient);
  EXPECT_EQ(server.rejected()[2].code(), ErrorCode::kInvalidArgument);
  for (auto* ch : {stale.get(), dup_b.get(), out_of_range.get()}) {
    const auto msg = ReceiveMessage(*ch, 1s);
    EXPECT_EQ(msg.type, MessageType::kAbort);
  }
  EXPECT_EQ(CodeOf([&] { dup_b->Receive(1s); }), ErrorCode::kTransport);
}

TEST(ServerTest, DuplicateDeltaAborts) {
  InProcessHub hub;
  ServerOptions opt;
  opt.num_clients = 2;
  opt.rounds = 3;
  opt.timeout = 5s;
  FederationServer server(opt, Zero());
  std::optional<ErrorCode> good_code;
  std::thread good([&, ch = hub.Connect()]() mutable {
    FakeTrainer t(0);
    good_code = CodeOf([&] { RunClient(*ch, t, {5s}); });
  });
  auto rogue = hub.Connect();
  std::thread bad([&] {
    SendMessage(*rogue, MakeHello(1));
    ParseHelloAck(ReceiveMessage(*rogue, 5s));
    const auto snap = ParseSnapshot(ReceiveMessage(*rogue, 5s));
    FakeTrainer t(1);
    const auto frame = EncodeMessage(MakeDeltaMessage(t.Train(snap)));
    rogue->Send(frame);
    rogue->Send(frame);
  });
  EXPECT_EQ(CodeOf([&] { server.Run(hub); }), ErrorCode::kDuplicateClient);
  bad.join();
  good.join();
  EXPECT_EQ(good_code, ErrorCode::kDuplicateClient);
  EXPECT_LE(server.history().size(), 2u);
}

TEST(ServerTest, ClientAbortStopsTheRound) {
  InProcessHub hub;
  ServerOptions opt;
  opt.num_clients = 1;
  opt.rounds = 2;
  opt.timeout = 5s;
  FederationServer server(opt, Zero());
  auto ch = hub.Connect();
  std::thread t([&] {
    SendMessage(*ch, MakeHello(0));
    ReceiveMessage(*ch, 5s);
    ReceiveMessage(*ch, 5s);
    SendMessage(*ch, MakeAbort(0, 1, ErrorCode::kShapeMismatch, "bad shape"));
  });
  EXPECT_EQ(CodeOf([&] { server.Run(hub); }), ErrorCode::kAborted);
  t.join();
  EXPECT_EQ(server.history().size(), 1u);
}

snn::Network SmallNetwork() {
  snn::LayerSpec spec;
  spec.kind = snn::LayerKind::kDense;
  spec.in_shape = {1, 1, 8};
  spec.out_shape = {1, 1, 2};
  snn::NetworkParams params;
  params.output = snn::NeuronParams{1, 1, 64, 0};
  return snn::Network::FromLayers(
      {snn::Layer{spec, std::vector<std::int8_t>(16, 0)}}, params);
}

std::vector<LabeledFrames> Shots() {
  std::vector<LabeledFrames> shots;
  for (std::size_t label = 0; label < 2; ++label) {
    snn::SpikeFrames f({1, 1, 8}, 96);
    for (std::size_t t = 0; t < 96; t += 3) {
      for (std::uint32_t j = 0; j < 4; ++j) {
        f.Add(t, static_cast<std::uint32_t>(label * 4 + j));
      }
    }
    f.Finalize();
    shots.push_back({std::move(f), label});
  }
  return shots;
}

plasticity::SoelEngine Engine(const plasticity::PlasticityConfig& cfg) {
  return plasticity::SoelEngine(cfg, 8, 2, quant::Rng(5, 1), quant::Rng(5, 2));
}

TEST(ClientTrainTest, ZeroEpochsGiveZeroDelta) {
  auto net = SmallNetwork();
  plasticity::PlasticityConfig cfg;
  auto engine = Engine(cfg);
  const auto shots = Shots();
  const auto d = ClientTrain(2, net, engine, shots, 0, SnapshotOf(net, 0));
  EXPECT_EQ(d.delta, std::vector<std::int16_t>(16, 0));
  EXPECT_EQ(d.client_id, 2u);
  EXPECT_EQ(d.round, 1u);
}

TEST(ClientTrainTest, UnreachableThresholdGivesZeroDelta) {
  auto net = SmallNetwork();
  plasticity::PlasticityConfig cfg;
  cfg.threshold = cfg.window + 1;
  auto engine = Engine(cfg);
  const auto shots = Shots();
  const auto d = ClientTrain(0, net, engine, shots, 3, SnapshotOf(net, 0));
  EXPECT_EQ(d.delta, std::vector<std::int16_t>(16, 0));
  EXPECT_EQ(engine.stats().triggers, 0);
}

TEST(ClientTrainTest, MatchesDirectReplay) {
  plasticity::PlasticityConfig cfg;
  cfg.learning_rate_log2 = -3;
  const auto shots = Shots();
  auto net = SmallNetwork();
  auto engine = Engine(cfg);
  std::vector<std::int8_t> start(16, 0);
  start[3] = 10;
  start[12] = -6;
  net.SetOutputWeights(start);
  const auto global = SnapshotOf(net, 0);
  const auto d = ClientTrain(0, net, engine, std::span(shots).first(1), 1, global);

  auto replay_net = SmallNetwork();
  replay_net.SetOutputWeights(start);
  auto replay_engine = Engine(cfg);
  plasticity::TrainSample(replay_net, replay_engine, shots[0].frames, 0);
  std::vector<std::int16_t> expected(16);
  for (std::size_t i = 0; i < 16; ++i) {
    expected[i] = static_cast<std::int16_t>(replay_net.output_weights()[i] - start[i]);
  }
  EXPECT_EQ(d.delta, expected);
  EXPECT_NE(d.delta, std::vector<std::int16_t>(16, 0));
}

TEST(ClientTrainTest, ShapeMismatch) {
  auto net = SmallNetwork();
  auto engine = Engine({});
  const auto shots = Shots();
  EXPECT_EQ(CodeOf([&] { ClientTrain(0, net, engine, shots, 1, Zero(4)); }),
            ErrorCode::kShapeMismatch);
}

TEST(SoelClientTest, SameSeedSameDelta) {
  const auto global = SnapshotOf(SmallNetwork(), 0);
  plasticity::PlasticityConfig cfg;
  cfg.learning_rate_log2 = -3;
  SoelClient a(1, SmallNetwork(), cfg, Shots(), 2, 42);
  SoelClient b(1, SmallNetwork(), cfg, Shots(), 2, 42);
  int hooks = 0;
  a.set_on_trained([&](const SoelClient&, const ModelDelta&) { ++hooks; });
  EXPECT_EQ(a.Train(global), b.Train(global));
  EXPECT_EQ(hooks, 1);
  EXPECT_EQ(a.last_round(), 1u);
  EXPECT_EQ(CodeOf([&] { SoelClient(0, SmallNetwork(), cfg, Shots(), -1, 1); }),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace nfl::fed
