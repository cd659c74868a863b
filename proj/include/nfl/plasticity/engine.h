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

#ifndef NFL_PLASTICITY_ENGINE_H_
#define NFL_PLASTICITY_ENGINE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nfl/plasticity/soel.h"
#include "nfl/quant.h"
#include "nfl/snn/network.h"

namespace nfl::plasticity {

struct TrainingStats {
  std::vector<std::int64_t> abs_error;  // per output, summed |err|
  std::int64_t evaluations = 0;         // window boundaries seen
  std::int64_t triggers = 0;            // (boundary, output) pairs that fired
  std::int64_t weight_changes = 0;

  explicit TrainingStats(std::size_t outputs = 0) : abs_error(outputs, 0) {}
};

// Learning state for one plastic layer: a trace pair per pre-synaptic neuron
// and an error unit per output. Weights live in the network and are passed
// in as a [pre][post] span.
class SoelEngine {
 public:
  SoelEngine(const PlasticityConfig& cfg, std::size_t pre_size,
             std::size_t num_outputs, quant::Rng trace_rng,
             quant::Rng weight_rng);

  // Clears traces and window counts; the labelled output gets the active
  // target, every other output the inactive one.
  void BeginSample(std::size_t label);

  // Advances one timestep. On a window boundary ((step + 1) % window == 0)
  // evaluates each output's error and, where it triggers, updates that
  // output's incoming weights. Returns true on a boundary.
  bool Step(std::size_t step, std::span<const std::uint32_t> pre_spikes,
            std::span<const std::uint32_t> post_spikes,
            std::span<const snn::NeuronState> post_states,
            std::span<std::int8_t> weights);

  const PlasticityConfig& config() const { return cfg_; }
  std::span<const TraceState> traces() const { return traces_; }
  std::span<const ErrorUnit> units() const { return units_; }
  const TrainingStats& stats() const { return stats_; }
  void ResetStats() { stats_ = TrainingStats(units_.size()); }

 private:
  PlasticityConfig cfg_;
  std::size_t pre_size_;
  std::vector<TraceState> traces_;
  std::vector<ErrorUnit> units_;
  std::vector<int> window_counts_;
  std::vector<std::uint8_t> pre_flags_;
  quant::Rng trace_rng_;
  quant::Rng weight_rng_;
  TrainingStats stats_;
};

// Called after every step with the step index and whether it closed a window.
using StepObserver = std::function<void(std::size_t step, bool boundary)>;

// Presents one labelled sample from rest while learning on the output layer.
void TrainSample(snn::Network& network, SoelEngine& engine,
                 const snn::SpikeFrames& frames, std::size_t label,
                 const StepObserver& observer = {});

}  // namespace nfl::plasticity

#endif  // NFL_PLASTICITY_ENGINE_H_
