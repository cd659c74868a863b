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

#ifndef NFL_EXPERIMENT_EXPERIMENT_H_
#define NFL_EXPERIMENT_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nfl/data/events.h"
#include "nfl/data/splits.h"
#include "nfl/experiment/config.h"
#include "nfl/fed/client.h"
#include "nfl/fed/model.h"
#include "nfl/snn/network.h"

namespace nfl::experiment {

// Generated recordings used by one experiment: per-client shots and the
// shared test set, in that order of appearance in the split.
struct Dataset {
  std::vector<std::vector<data::GestureSample>> client_shots;
  std::vector<data::GestureSample> test;
};

// Pool layout (subject-major, then class, then repeat) and the split over
// it. Only the selected recordings are generated.
Dataset GenerateDataset(const ExperimentConfig& config);

// Writes client_<k>/shot_<j>.nfev, test/sample_<i>.nfev and manifest.json.
void WriteDataset(const Dataset& dataset, const ExperimentConfig& config,
                  const std::filesystem::path& dir);
// Reads a directory written by WriteDataset.
Dataset ReadDataset(const std::filesystem::path& dir,
                    const ExperimentConfig& config);

// Output index of a synthetic class label. Throws Error(kInvalidArgument)
// for classes outside the novel set.
std::size_t OutputIndex(const ExperimentConfig& config, int label);

std::vector<fed::LabeledFrames> ToFrames(
    std::span<const data::GestureSample> samples,
    const ExperimentConfig& config);

// Frozen hidden layers (generated or loaded) plus a zero output layer.
snn::Network BuildNetwork(const ExperimentConfig& config);

// Fraction of samples classified correctly. Throws Error(kEmptyTestSet).
double Evaluate(const snn::Network& network,
                std::span<const fed::LabeledFrames> test);

// Per-client rounding seed shared by in-process and multi-process runs.
std::uint64_t ClientSeed(const ExperimentConfig& config);

struct Workload {
  snn::Network network;
  std::vector<std::vector<fed::LabeledFrames>> client_shots;
  std::vector<fed::LabeledFrames> test;
};

Workload PrepareWorkload(const ExperimentConfig& config,
                         const Dataset& dataset);

// One line per record, compact JSON, stable key order.
using MetricsSink = std::function<void(const std::string& line)>;

struct SimulationResult {
  fed::ModelSnapshot final_snapshot{};
  std::vector<fed::ModelSnapshot> history{};
  std::optional<double> initial_global_accuracy{};
  // Accuracy of each client's own model after round 1 local training, i.e.
  // one-shot learning before any averaging.
  std::vector<double> round0_accuracy{};
  // Accuracy of each client's own model after its final local training.
  std::vector<double> final_accuracy{};
  std::vector<double> global_accuracy{};  // per round, w_1 .. w_E
  snn::Network global_network;
  std::vector<snn::Network> client_networks{};
};

// Runs the whole federation in-process (or over loopback sockets when the
// config asks for it) and streams metrics records to `sink`:
//   {"type":"initial","round":0,"test_accuracy":a}
//   {"type":"client","round":t,"client":k,"train_err":[...],"triggers":n,
//    "weight_changes":n,"test_accuracy":a}   (K per round)
//   {"type":"global","round":t,"checksum":c,"test_accuracy":a}
//   {"type":"summary",...}
SimulationResult RunSimulation(const ExperimentConfig& config,
                               const Workload& workload,
                               const MetricsSink& sink);

// Writes config.json, global.nfw and client_<k>.nfw.
void WriteSimulationOutputs(const ExperimentConfig& config,
                            const SimulationResult& result,
                            const std::filesystem::path& dir);

std::string FormatChecksum(std::uint32_t checksum);

}  // namespace nfl::experiment

#endif  // NFL_EXPERIMENT_EXPERIMENT_H_
