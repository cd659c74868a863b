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

// nfl: federated one-shot learning on spiking networks.
//
//   nfl gen-data --out DIR
//   nfl simulate [--out DIR] [--data DIR]
//   nfl serve    --listen HOST:PORT [--out DIR]
//   nfl client   --id K --server HOST:PORT [--data DIR] [--out DIR]
//   nfl eval     --weights FILE [--data DIR]
//
// Every command takes --config PATH and the overrides --seed, --rounds,
// --clients, --transport, --listen.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "nfl/bytes.h"
#include "nfl/error.h"
#include "nfl/experiment/config.h"
#include "nfl/experiment/experiment.h"
#include "nfl/fed/client.h"
#include "nfl/fed/server.h"
#include "nfl/fed/transport.h"
#include "nfl/snn/weight_file.h"

namespace {

namespace fs = std::filesystem;
using nfl::Error;
using nfl::ErrorCode;
using namespace nfl::experiment;
using Json = nlohmann::ordered_json;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> rounds;
  std::optional<std::uint32_t> clients;
  std::optional<std::string> transport;
  std::optional<std::string> listen;
  std::string out;
  std::string data;
  std::string weights;
  std::string server;
  std::uint32_t id = 0;
};

ExperimentConfig Resolve(const Options& o) {
  auto cfg = o.config.empty() ? ExperimentConfig() : LoadConfig(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.rounds) cfg.federation.rounds = *o.rounds;
  if (o.clients) cfg.federation.num_clients = *o.clients;
  if (o.transport) {
    cfg.federation.transport = *o.transport == "socket"
                                   ? nfl::fed::TransportKind::kSocket
                                   : nfl::fed::TransportKind::kInProcess;
  }
  if (o.listen) cfg.federation.listen = *o.listen;
  cfg.Validate();
  return cfg;
}

// Appends records to stdout and, when a directory is given, metrics.jsonl.
class Metrics {
 public:
  explicit Metrics(const std::string& dir) {
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    file_.open(fs::path(dir) / "metrics.jsonl",
               std::ios::binary | std::ios::trunc);
    if (!file_) throw Error(ErrorCode::kIo, "cannot write metrics in " + dir);
  }
  void operator()(const std::string& line) {
    std::cout << line << '\n' << std::flush;
    if (file_.is_open()) file_ << line << '\n' << std::flush;
  }

 private:
  std::ofstream file_;
};

Dataset LoadOrGenerate(const ExperimentConfig& cfg, const std::string& dir) {
  return dir.empty() ? GenerateDataset(cfg) : ReadDataset(dir, cfg);
}

void WriteConfig(const ExperimentConfig& cfg, const std::string& dir) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  const auto text = ConfigToJson(cfg);
  nfl::WriteFileBytes(fs::path(dir) / "config.json",
                      std::vector<std::uint8_t>(text.begin(), text.end()));
}

int GenData(const Options& o) {
  const auto cfg = Resolve(o);
  const auto dataset = GenerateDataset(cfg);
  WriteDataset(dataset, cfg, o.out);
  WriteConfig(cfg, o.out);
  std::size_t shots = 0;
  for (const auto& c : dataset.client_shots) shots += c.size();
  std::cout << Json{{"type", "dataset"},
                    {"clients", dataset.client_shots.size()},
                    {"shots", shots},
                    {"test", dataset.test.size()}}
                   .dump()
            << '\n';
  return 0;
}

int Simulate(const Options& o) {
  const auto cfg = Resolve(o);
  const auto workload = PrepareWorkload(cfg, LoadOrGenerate(cfg, o.data));
  Metrics metrics(o.out);
  const auto result = RunSimulation(
      cfg, workload, [&](const std::string& line) { metrics(line); });
  if (!o.out.empty()) WriteSimulationOutputs(cfg, result, o.out);
  return 0;
}

int Serve(const Options& o) {
  const auto cfg = Resolve(o);
  auto network = BuildNetwork(cfg);
  std::vector<nfl::fed::LabeledFrames> test;
  if (!o.data.empty() || cfg.data.test_size > 0) {
    test = ToFrames(LoadOrGenerate(cfg, o.data).test, cfg);
  }
  Metrics metrics(o.out);
  WriteConfig(cfg, o.out);

  nfl::fed::SocketListener listener(
      nfl::fed::SocketAddress::Parse(cfg.federation.listen));
  std::cerr << "listening on " << listener.address().ToString() << std::endl;

  auto accuracy = [&](const nfl::fed::ModelSnapshot& s) -> Json {
    if (test.empty()) return nullptr;
    auto net = network;
    net.SetOutputWeights(s.weights);
    return Evaluate(net, test);
  };
  const auto initial = nfl::fed::SnapshotOf(network, 0);
  metrics(Json{{"type", "initial"},
               {"round", 0},
               {"checksum", FormatChecksum(initial.checksum)},
               {"test_accuracy", accuracy(initial)}}
              .dump());
  nfl::fed::FederationServer server(
      nfl::fed::ServerOptions{cfg.federation.num_clients,
                              cfg.federation.rounds, cfg.federation.timeout},
      initial);
  const auto final_snapshot =
      server.Run(listener, [&](const nfl::fed::ModelSnapshot& s) {
        metrics(Json{{"type", "global"},
                     {"round", s.round},
                     {"checksum", FormatChecksum(s.checksum)},
                     {"test_accuracy", accuracy(s)}}
                    .dump());
      });
  if (!o.out.empty()) {
    network.SetOutputWeights(final_snapshot.weights);
    nfl::snn::SaveWeights(fs::path(o.out) / "global.nfw", network);
  }
  return 0;
}

int Client(const Options& o) {
  const auto cfg = Resolve(o);
  if (o.id >= cfg.federation.num_clients) {
    throw Error(ErrorCode::kConfig,
                "--id: must be below federation.clients (" +
                    std::to_string(cfg.federation.num_clients) + ")");
  }
  const auto workload = PrepareWorkload(cfg, LoadOrGenerate(cfg, o.data));
  Metrics metrics(o.out);
  nfl::fed::SoelClient client(o.id, workload.network, cfg.plasticity,
                              workload.client_shots[o.id],
                              cfg.federation.local_epochs, ClientSeed(cfg));
  std::optional<nfl::snn::Network> trained;
  client.set_on_trained([&](const nfl::fed::SoelClient& c,
                            const nfl::fed::ModelDelta& delta) {
    const auto& stats = c.last_stats();
    metrics(Json{{"type", "client"},
                 {"round", delta.round},
                 {"client", c.client_id()},
                 {"train_err", stats.abs_error},
                 {"triggers", stats.triggers},
                 {"weight_changes", stats.weight_changes},
                 {"test_accuracy", workload.test.empty()
                                       ? Json(nullptr)
                                       : Json(Evaluate(c.network(),
                                                       workload.test))}}
                .dump());
    trained = c.network();
  });
  auto channel = nfl::fed::ConnectSocket(
      nfl::fed::SocketAddress::Parse(o.server), cfg.federation.timeout);
  nfl::fed::RunClient(*channel, client,
                      nfl::fed::ClientOptions{cfg.federation.timeout});
  if (!o.out.empty()) {
    nfl::snn::SaveWeights(
        fs::path(o.out) / ("client_" + std::to_string(o.id) + ".nfw"),
        trained ? *trained : client.network());
  }
  return 0;
}

int Eval(const Options& o) {
  const auto cfg = Resolve(o);
  const auto network = nfl::snn::LoadWeights(o.weights, cfg.network.params);
  const auto test = ToFrames(LoadOrGenerate(cfg, o.data).test, cfg);
  const double accuracy = Evaluate(network, test);
  std::cout << Json{{"type", "eval"},
                    {"samples", test.size()},
                    {"test_accuracy", accuracy}}
                   .dump()
            << '\n';
  return 0;
}

void AddCommon(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--rounds", o.rounds, "server rounds E");
  cmd->add_option("--clients", o.clients, "number of clients K");
  cmd->add_option("--transport", o.transport, "inproc or socket")
      ->check(CLI::IsMember({"inproc", "socket"}));
  cmd->add_option("--listen", o.listen, "server address HOST:PORT");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated one-shot learning on spiking networks"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen-data", "write shots, test set, manifest");
  AddCommon(gen, o);
  gen->add_option("--out", o.out, "output directory")->required();

  auto* sim = app.add_subcommand("simulate", "run the whole federation");
  AddCommon(sim, o);
  sim->add_option("--out", o.out, "output directory");
  sim->add_option("--data", o.data, "dataset directory from gen-data");

  auto* serve = app.add_subcommand("serve", "run the federation server");
  AddCommon(serve, o);
  serve->add_option("--out", o.out, "output directory");
  serve->add_option("--data", o.data, "dataset directory for evaluation");

  auto* client = app.add_subcommand("client", "run one federation client");
  AddCommon(client, o);
  client->add_option("--id", o.id, "client id")->required();
  client->add_option("--server", o.server, "server address HOST:PORT")
      ->required();
  client->add_option("--data", o.data, "dataset directory from gen-data");
  client->add_option("--out", o.out, "output directory");

  auto* eval = app.add_subcommand("eval", "test accuracy of a weight file");
  AddCommon(eval, o);
  eval->add_option("--weights", o.weights, "weight file")->required();
  eval->add_option("--data", o.data, "dataset directory from gen-data");

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return GenData(o);
    if (sim->parsed()) return Simulate(o);
    if (serve->parsed()) return Serve(o);
    if (client->parsed()) return Client(o);
    if (eval->parsed()) return Eval(o);
  } catch (const Error& e) {
    std::cerr << "nfl: " << nfl::ErrorCodeName(e.code()) << ": " << e.what()
              << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "nfl: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
