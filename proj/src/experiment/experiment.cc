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

#include "nfl/experiment/experiment.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "json.hpp"
#include "nfl/bytes.h"
#include "nfl/data/synthetic.h"
#include "nfl/error.h"
#include "nfl/quant.h"
#include "nfl/snn/weight_file.h"

namespace nfl::experiment {

namespace {

using Json = nlohmann::ordered_json;

struct PoolLayout {
  std::vector<data::SampleInfo> infos;
  std::vector<int> repeat;
};

PoolLayout MakePool(const ExperimentConfig& config) {
  PoolLayout pool;
  const auto& d = config.data;
  for (int s = 0; s < d.subjects; ++s) {
    for (int label : d.novel_classes) {
      for (int r = 0; r < d.samples_per_subject; ++r) {
        pool.infos.push_back({label, s});
        pool.repeat.push_back(r);
      }
    }
  }
  return pool;
}

data::GestureSample GeneratePoolSample(const ExperimentConfig& config,
                                       const PoolLayout& pool,
                                       std::size_t index) {
  const auto& d = config.data;
  data::SyntheticOptions options;
  options.width = d.width;
  options.height = d.height;
  options.duration_us = d.duration_us;
  options.noise_rate_hz = d.noise_rate_hz;
  options.texture_rate_hz = d.texture_rate_hz;
  options.subject = pool.infos[index].subject;
  options.style_seed = ComponentSeed(config.seed, "data-style");
  quant::Rng rng(ComponentSeed(config.seed, "data-sample"),
                 quant::DeriveStream("pool", index));
  return data::GenerateSynthetic(pool.infos[index].label, rng.NextU64(),
                                 options);
}

Json AccuracyJson(std::optional<double> a) {
  return a ? Json(*a) : Json(nullptr);
}

}  // namespace

Dataset GenerateDataset(const ExperimentConfig& config) {
  config.Validate();
  const auto pool = MakePool(config);
  data::SplitParams params;
  params.num_clients = static_cast<int>(config.federation.num_clients);
  params.novel_classes = config.data.novel_classes;
  params.shots_per_class = config.data.shots_per_class;
  params.test_size = config.data.test_size;
  params.seed = ComponentSeed(config.seed, "split");
  params.test_subject_fraction =
      static_cast<double>(config.data.test_subjects) / config.data.subjects;
  const auto splits = data::MakeSplits(pool.infos, params);

  Dataset dataset;
  for (const auto& client : splits.shots.client_samples) {
    auto& shots = dataset.client_shots.emplace_back();
    for (auto idx : client) shots.push_back(GeneratePoolSample(config, pool, idx));
  }
  for (auto idx : splits.test) {
    dataset.test.push_back(GeneratePoolSample(config, pool, idx));
  }
  return dataset;
}

void WriteDataset(const Dataset& dataset, const ExperimentConfig& config,
                  const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot create " + dir.string() + ": " + ec.message());
  }
  Json manifest{{"duration_us", config.data.duration_us},
                {"novel_classes", config.data.novel_classes},
                {"clients", Json::array()},
                {"test", Json::array()}};
  for (std::size_t k = 0; k < dataset.client_shots.size(); ++k) {
    const fs::path sub = "client_" + std::to_string(k);
    fs::create_directories(dir / sub, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + (dir / sub).string());
    Json files = Json::array();
    for (std::size_t j = 0; j < dataset.client_shots[k].size(); ++j) {
      const auto rel = sub / ("shot_" + std::to_string(j) + ".nfev");
      data::WriteEvents(dir / rel, dataset.client_shots[k][j]);
      files.push_back(rel.generic_string());
    }
    manifest["clients"].push_back(files);
  }
  fs::create_directories(dir / "test", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + (dir / "test").string());
  for (std::size_t i = 0; i < dataset.test.size(); ++i) {
    const auto rel = fs::path("test") / ("sample_" + std::to_string(i) + ".nfev");
    data::WriteEvents(dir / rel, dataset.test[i]);
    manifest["test"].push_back(rel.generic_string());
  }
  const auto text = manifest.dump(2) + "\n";
  WriteFileBytes(dir / "manifest.json",
                 std::vector<std::uint8_t>(text.begin(), text.end()));
}

Dataset ReadDataset(const std::filesystem::path& dir,
                    const ExperimentConfig& config) {
  const auto bytes = ReadFileBytes(dir / "manifest.json");
  Json manifest;
  try {
    manifest = Json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadPayload,
                "manifest.json: " + std::string(e.what()));
  }
  auto read = [&](const Json& rel) {
    if (!rel.is_string()) {
      throw Error(ErrorCode::kBadPayload, "manifest.json: expected file names");
    }
    auto sample = data::ReadEvents(dir / rel.get<std::string>());
    sample.duration_us = config.data.duration_us;
    if (manifest.contains("duration_us")) {
      sample.duration_us = manifest["duration_us"].get<std::uint32_t>();
    }
    return sample;
  };
  Dataset dataset;
  if (!manifest.contains("clients") || !manifest.contains("test")) {
    throw Error(ErrorCode::kBadPayload,
                "manifest.json: missing \"clients\" or \"test\"");
  }
  for (const auto& client : manifest["clients"]) {
    auto& shots = dataset.client_shots.emplace_back();
    for (const auto& rel : client) shots.push_back(read(rel));
  }
  for (const auto& rel : manifest["test"]) dataset.test.push_back(read(rel));
  return dataset;
}

std::size_t OutputIndex(const ExperimentConfig& config, int label) {
  const auto& classes = config.data.novel_classes;
  auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "class " + std::to_string(label) + " is not a novel class");
  }
  return static_cast<std::size_t>(it - classes.begin());
}

std::vector<fed::LabeledFrames> ToFrames(
    std::span<const data::GestureSample> samples,
    const ExperimentConfig& config) {
  std::vector<fed::LabeledFrames> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.width != config.data.width || s.height != config.data.height) {
      throw Error(ErrorCode::kShapeMismatch,
                  "recording is " + std::to_string(s.width) + "x" +
                      std::to_string(s.height) + ", sensor is " +
                      std::to_string(config.data.width) + "x" +
                      std::to_string(config.data.height));
    }
    out.push_back({data::BinEvents(s, config.data.dt_us),
                   OutputIndex(config, s.label)});
  }
  return out;
}

snn::Network BuildNetwork(const ExperimentConfig& config) {
  config.Validate();
  const snn::Shape3 input{config.data.height, config.data.width, 2};
  auto notation = HiddenNotation(config.network);
  notation += (notation.empty() ? "" : ",") +
              std::to_string(config.data.novel_classes.size());
  const auto arch = snn::ParseArchitecture(input, notation);
  snn::HiddenInit init;
  init.seed = ComponentSeed(config.seed, "hidden-init");
  init.density = config.network.hidden_density;
  init.min_weight = config.network.hidden_min_weight;
  init.max_weight = config.network.hidden_max_weight;
  auto network = snn::Network::Build(arch, config.network.params, init);
  if (!config.network.hidden_weights.empty()) {
    auto layers = snn::LoadWeights(config.network.hidden_weights,
                                   config.network.params)
                      .layers();
    std::vector<snn::Layer> merged(layers.begin(), layers.end());
    if (merged.size() != network.layer_count()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "hidden weight file has " + std::to_string(merged.size()) +
                      " layers, architecture has " +
                      std::to_string(network.layer_count()));
    }
    for (std::size_t i = 0; i < merged.size(); ++i) {
      if (!(merged[i].spec == network.layer(i).spec)) {
        throw Error(ErrorCode::kShapeMismatch,
                    "hidden weight file layer " + std::to_string(i) +
                        " does not match the architecture");
      }
    }
    std::fill(merged.back().weights.begin(), merged.back().weights.end(), 0);
    network = snn::Network::FromLayers(std::move(merged), config.network.params);
  }
  return network;
}

double Evaluate(const snn::Network& network,
                std::span<const fed::LabeledFrames> test) {
  if (test.empty()) throw Error(ErrorCode::kEmptyTestSet, "empty test set");
  std::size_t correct = 0;
  for (const auto& sample : test) {
    if (snn::Classify(snn::ForwardWindow(network, sample.frames)) ==
        sample.label) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

std::uint64_t ClientSeed(const ExperimentConfig& config) {
  return ComponentSeed(config.seed, "client");
}

Workload PrepareWorkload(const ExperimentConfig& config,
                         const Dataset& dataset) {
  Workload w{BuildNetwork(config), {}, ToFrames(dataset.test, config)};
  if (dataset.client_shots.size() != config.federation.num_clients) {
    throw Error(ErrorCode::kInsufficientSamples,
                "dataset has shots for " +
                    std::to_string(dataset.client_shots.size()) +
                    " clients, federation expects " +
                    std::to_string(config.federation.num_clients));
  }
  for (const auto& shots : dataset.client_shots) {
    w.client_shots.push_back(ToFrames(shots, config));
  }
  return w;
}

std::string FormatChecksum(std::uint32_t checksum) {
  char buf[11];
  std::snprintf(buf, sizeof(buf), "0x%08x", checksum);
  return buf;
}

SimulationResult RunSimulation(const ExperimentConfig& config,
                               const Workload& workload,
                               const MetricsSink& sink) {
  config.Validate();
  const auto k_clients = config.federation.num_clients;
  const bool has_test = !workload.test.empty();
  auto evaluate = [&](const snn::Network& net) -> std::optional<double> {
    if (!has_test) return std::nullopt;
    return Evaluate(net, workload.test);
  };

  SimulationResult result{.global_network = workload.network};
  const auto initial = fed::SnapshotOf(workload.network, 0);
  result.initial_global_accuracy = evaluate(workload.network);
  sink(Json{{"type", "initial"},
            {"round", 0},
            {"checksum", FormatChecksum(initial.checksum)},
            {"test_accuracy", AccuracyJson(result.initial_global_accuracy)}}
           .dump());

  std::vector<std::unique_ptr<fed::SoelClient>> clients;
  std::vector<fed::LocalTrainer*> trainers;
  const auto seed = ClientSeed(config);
  for (std::uint32_t k = 0; k < k_clients; ++k) {
    clients.push_back(std::make_unique<fed::SoelClient>(
        k, workload.network, config.plasticity, workload.client_shots[k],
        config.federation.local_epochs, seed));
    trainers.push_back(clients.back().get());
  }
  result.client_networks.assign(k_clients, workload.network);
  std::vector<std::optional<double>> client_acc(k_clients);
  result.round0_accuracy.assign(k_clients, 0.0);

  std::mutex mu;
  std::map<std::uint32_t, std::map<std::uint32_t, std::string>> pending;
  for (auto& client : clients) {
    client->set_on_trained([&](const fed::SoelClient& c,
                               const fed::ModelDelta& delta) {
      const auto acc = evaluate(c.network());
      const auto& stats = c.last_stats();
      Json record{{"type", "client"},
                  {"round", delta.round},
                  {"client", c.client_id()},
                  {"train_err", stats.abs_error},
                  {"triggers", stats.triggers},
                  {"weight_changes", stats.weight_changes},
                  {"test_accuracy", AccuracyJson(acc)}};
      std::lock_guard<std::mutex> lock(mu);
      pending[delta.round][c.client_id()] = record.dump();
      result.client_networks[c.client_id()] = c.network();
      client_acc[c.client_id()] = acc;
      if (delta.round == 1 && acc) result.round0_accuracy[c.client_id()] = *acc;
    });
  }

  auto on_round = [&](const fed::ModelSnapshot& snapshot) {
    snn::Network global = workload.network;
    global.SetOutputWeights(snapshot.weights);
    const auto acc = evaluate(global);
    if (acc) result.global_accuracy.push_back(*acc);
    std::map<std::uint32_t, std::string> lines;
    {
      std::lock_guard<std::mutex> lock(mu);
      lines = std::move(pending[snapshot.round]);
      pending.erase(snapshot.round);
    }
    for (const auto& [client, line] : lines) sink(line);
    sink(Json{{"type", "global"},
              {"round", snapshot.round},
              {"checksum", FormatChecksum(snapshot.checksum)},
              {"test_accuracy", AccuracyJson(acc)}}
             .dump());
  };

  auto fed_result =
      fed::RunFederation(config.federation, initial, trainers, on_round);
  result.final_snapshot = fed_result.final_snapshot;
  result.history = std::move(fed_result.history);
  result.global_network.SetOutputWeights(result.final_snapshot.weights);

  if (config.federation.rounds == 0) {
    result.round0_accuracy.clear();
  } else if (has_test) {
    for (const auto& acc : client_acc) result.final_accuracy.push_back(*acc);
  }
  if (config.federation.rounds > 0) {
    Json summary{{"type", "summary"},
                 {"rounds", config.federation.rounds},
                 {"clients", k_clients},
                 {"checksum", FormatChecksum(result.final_snapshot.checksum)},
                 {"round0_accuracy", result.round0_accuracy},
                 {"final_accuracy", result.final_accuracy},
                 {"global_accuracy",
                  AccuracyJson(result.global_accuracy.empty()
                                   ? std::nullopt
                                   : std::optional<double>(
                                         result.global_accuracy.back()))}};
    sink(summary.dump());
  }
  return result;
}

void WriteSimulationOutputs(const ExperimentConfig& config,
                            const SimulationResult& result,
                            const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot create " + dir.string() + ": " + ec.message());
  }
  const auto text = ConfigToJson(config);
  WriteFileBytes(dir / "config.json",
                 std::vector<std::uint8_t>(text.begin(), text.end()));
  snn::SaveWeights(dir / "global.nfw", result.global_network);
  for (std::size_t k = 0; k < result.client_networks.size(); ++k) {
    snn::SaveWeights(dir / ("client_" + std::to_string(k) + ".nfw"),
                     result.client_networks[k]);
  }
}

}  // namespace nfl::experiment
