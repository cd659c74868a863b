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

#include "nfl/plasticity/engine.h"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "nfl/error.h"

namespace nfl::plasticity {

SoelEngine::SoelEngine(const PlasticityConfig& cfg, std::size_t pre_size,
                       std::size_t num_outputs, quant::Rng trace_rng,
                       quant::Rng weight_rng)
    : cfg_(cfg),
      pre_size_(pre_size),
      traces_(pre_size),
      units_(num_outputs, cfg.MakeErrorUnit(cfg.target_inactive)),
      window_counts_(num_outputs, 0),
      pre_flags_(pre_size, 0),
      trace_rng_(trace_rng),
      weight_rng_(weight_rng),
      stats_(num_outputs) {
  cfg_.Validate();
}

void SoelEngine::BeginSample(std::size_t label) {
  if (label >= units_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "label " + std::to_string(label) + " has no output neuron");
  }
  std::fill(traces_.begin(), traces_.end(), TraceState{});
  std::fill(window_counts_.begin(), window_counts_.end(), 0);
  for (std::size_t i = 0; i < units_.size(); ++i) {
    units_[i] = cfg_.MakeErrorUnit(i == label ? cfg_.target_active
                                              : cfg_.target_inactive);
  }
}

bool SoelEngine::Step(std::size_t step,
                      std::span<const std::uint32_t> pre_spikes,
                      std::span<const std::uint32_t> post_spikes,
                      std::span<const snn::NeuronState> post_states,
                      std::span<std::int8_t> weights) {
  const std::size_t outputs = units_.size();
  if (weights.size() != pre_size_ * outputs || post_states.size() != outputs) {
    throw Error(ErrorCode::kShapeMismatch,
                "plastic layer does not match the learning engine");
  }

  for (auto j : pre_spikes) pre_flags_[j] = 1;
  for (std::size_t j = 0; j < pre_size_; ++j) {
    traces_[j] = UpdateTrace(traces_[j], cfg_.trace, pre_flags_[j] != 0,
                             trace_rng_);
  }
  for (auto j : pre_spikes) pre_flags_[j] = 0;
  for (auto i : post_spikes) ++window_counts_[i];

  if ((step + 1) % static_cast<std::size_t>(cfg_.window) != 0) return false;

  ++stats_.evaluations;
  for (std::size_t i = 0; i < outputs; ++i) {
    units_[i] = EvaluateError(units_[i], window_counts_[i]);
    window_counts_[i] = 0;
    stats_.abs_error[i] += std::abs(units_[i].last_error);
    if (!units_[i].triggered) continue;
    ++stats_.triggers;
    const int gate =
        BoxGateValue(cfg_.box, post_states[i].voltage, cfg_.box_enabled);
    for (std::size_t j = 0; j < pre_size_; ++j) {
      auto& w = weights[j * outputs + i];
      const auto next = static_cast<std::int8_t>(
          ApplySoelUpdate(w, units_[i], traces_[j], gate, cfg_, weight_rng_));
      if (next != w) ++stats_.weight_changes;
      w = next;
    }
  }
  return true;
}

void TrainSample(snn::Network& network, SoelEngine& engine,
                 const snn::SpikeFrames& frames, std::size_t label,
                 const StepObserver& observer) {
  if (frames.shape() != network.input_shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                "sample shape " + frames.shape().ToString() +
                    " does not match network input " +
                    network.input_shape().ToString());
  }
  snn::NetworkRunner runner(network);
  engine.BeginSample(label);
  for (std::size_t t = 0; t < frames.num_steps(); ++t) {
    runner.Step(frames.Active(t));
    const bool boundary =
        engine.Step(t, runner.PlasticInputSpikes(), runner.OutputSpikes(),
                    runner.OutputStates(), network.mutable_output_weights());
    if (observer) observer(t, boundary);
  }
}

}  // namespace nfl::plasticity
