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

#ifndef NFL_EXPERIMENT_CONFIG_H_
#define NFL_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nfl/fed/server.h"
#include "nfl/plasticity/soel.h"
#include "nfl/snn/network.h"

namespace nfl::experiment {

struct DataConfig {
  int width = 32;
  int height = 32;
  // Synthetic classes learned on-device; output neuron i stands for
  // novel_classes[i].
  std::vector<int> novel_classes{0, 2, 4, 6, 8};
  std::uint32_t dt_us = 10'000;
  std::uint32_t duration_us = 1'450'000;
  double noise_rate_hz = 0.2;
  double texture_rate_hz = 40.0;
  int shots_per_class = 1;
  int test_size = 100;
  int subjects = 29;
  int test_subjects = 6;
  // Recordings per (subject, class) in the generated pool.
  int samples_per_subject = 4;
};

struct NetworkConfig {
  // "desk", "full", or hidden-layer notation such as "2a,128"; the plastic
  // output layer is appended.
  std::string architecture = "desk";
  // Optional weight file supplying the frozen layers.
  std::string hidden_weights;
  double hidden_density = 1.0;
  int hidden_min_weight = -128;
  int hidden_max_weight = 126;
  snn::NetworkParams params;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  NetworkConfig network;
  plasticity::PlasticityConfig plasticity;
  fed::FedConfig federation;
  DataConfig data;

  ExperimentConfig();

  // Throws Error(kConfig) naming the first offending field.
  void Validate() const;
};

// JSON with sections seed / network / plasticity / federation / data.
// Missing keys keep their defaults; unknown keys and wrong types are errors.
// Comments are allowed.
ExperimentConfig ParseConfig(std::string_view text);
ExperimentConfig LoadConfig(const std::filesystem::path& path);
// Fully resolved config, every field present.
std::string ConfigToJson(const ExperimentConfig& config);

// Hidden-layer notation for an architecture name ("desk", "full") or the
// notation itself.
std::string HiddenNotation(const NetworkConfig& network);

// Independent seed for a named component, derived from the master seed.
std::uint64_t ComponentSeed(std::uint64_t master, std::string_view component);

}  // namespace nfl::experiment

#endif  // NFL_EXPERIMENT_CONFIG_H_
