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

#ifndef NFL_SNN_NETWORK_H_
#define NFL_SNN_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nfl/snn/neuron.h"

namespace nfl::snn {

struct Shape3 {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  // Flat index in (y, x, c) row-major order.
  std::size_t Index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::string ToString() const;

  friend bool operator==(const Shape3&, const Shape3&) = default;
};

enum class LayerKind : std::uint8_t {
  kSumPool = 0,
  kConv = 1,
  kDense = 2,
};

// One layer of the topology.
//
// Weight layouts:
//   conv  [ky][kx][in_channel][out_channel]
//   dense [in][out]
// Pool layers carry no weights; each input spike adds the network's fixed
// pool gain to its pooled target.
struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  int kernel = 1;
  int stride = 1;
  bool zero_pad = false;
  Shape3 in_shape;
  Shape3 out_shape;

  std::size_t WeightCount() const;
  // Checks the per-kind relation between in_shape and out_shape.
  void Validate() const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Layer {
  LayerSpec spec;
  std::vector<std::int8_t> weights;

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct Architecture {
  std::vector<LayerSpec> layers;

  // Shapes must chain, the last layer must be dense with >= 1 output.
  void Validate() const;
};

// Builds an architecture from compact layer notation, e.g.
// "4a,16c5z,2a,32c3z,2a,512,5":
//   Ya    YxY sum pooling
//   XcYz  X convolution filters of YxY with zero padding (XcY: no padding)
//   N     dense layer with N outputs
Architecture ParseArchitecture(const Shape3& input, std::string_view notation);

// The 128x128x2 gesture network with `num_classes` plastic outputs.
Architecture TableOneArchitecture(int num_classes);

// Frozen hidden-layer weights are drawn uniformly from the even integers in
// [min_weight, max_weight]; each synapse exists with probability `density`.
struct HiddenInit {
  std::uint64_t seed = 0;
  double density = 1.0;
  int min_weight = -128;
  int max_weight = 126;
};

struct NetworkParams {
  NeuronParams hidden;
  NeuronParams output;
  std::int32_t pool_weight = 256;

  void Validate() const;

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

// Layer stack whose last (dense) layer is plastic; all others are frozen.
class Network {
 public:
  // Hidden layers initialized from `init`, output layer all zeros.
  static Network Build(const Architecture& arch, const NetworkParams& params,
                       const HiddenInit& init);
  // Validates shapes and the even-weight invariant.
  static Network FromLayers(std::vector<Layer> layers,
                            const NetworkParams& params);

  const NetworkParams& params() const { return params_; }
  const Shape3& input_shape() const { return layers_.front().spec.in_shape; }
  std::size_t layer_count() const { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return layers_[i]; }
  std::span<const Layer> layers() const { return layers_; }
  Architecture architecture() const;

  // Plastic layer, stored [pre][post].
  std::size_t pre_size() const { return layers_.back().spec.in_shape.size(); }
  std::size_t num_outputs() const {
    return layers_.back().spec.out_shape.size();
  }
  std::span<const std::int8_t> output_weights() const {
    return layers_.back().weights;
  }
  std::span<std::int8_t> mutable_output_weights() {
    return layers_.back().weights;
  }
  // Throws on size mismatch or a value off the even 8-bit grid.
  void SetOutputWeights(std::span<const std::int8_t> weights);

  friend bool operator==(const Network&, const Network&) = default;

 private:
  Network(std::vector<Layer> layers, const NetworkParams& params)
      : layers_(std::move(layers)), params_(params) {}

  std::vector<Layer> layers_;
  NetworkParams params_;
};

// Binary spike input: for each timestep, the sorted set of active flat
// indices into `shape`.
class SpikeFrames {
 public:
  SpikeFrames() = default;
  SpikeFrames(const Shape3& shape, std::size_t steps)
      : shape_(shape), active_(steps) {}

  // Repeated (step, index) pairs collapse to one spike once Finalize() runs.
  void Add(std::size_t step, std::uint32_t index);
  void Finalize();

  const Shape3& shape() const { return shape_; }
  std::size_t num_steps() const { return active_.size(); }
  std::span<const std::uint32_t> Active(std::size_t step) const {
    return active_[step];
  }
  std::size_t TotalSpikes() const;

  friend bool operator==(const SpikeFrames&, const SpikeFrames&) = default;

 private:
  Shape3 shape_;
  std::vector<std::vector<std::uint32_t>> active_;
};

// Per-neuron spike counts since `window_start`.
struct SpikeCounter {
  std::vector<int> counts;
  std::size_t window_start = 0;

  explicit SpikeCounter(std::size_t neurons = 0) : counts(neurons, 0) {}
  void Record(std::span<const std::uint32_t> spikes);
  void Reset(std::size_t step);
};

// Steps a network through time. Holds a pointer to the network so plastic
// weight changes made between steps take effect on the next step.
class NetworkRunner {
 public:
  explicit NetworkRunner(const Network& network);

  void Reset();
  void Step(std::span<const std::uint32_t> active_inputs);

  // Spikes entering the plastic layer on the last step.
  std::span<const std::uint32_t> PlasticInputSpikes() const;
  std::span<const std::uint32_t> OutputSpikes() const {
    return spikes_.back();
  }
  std::span<const std::uint32_t> LayerSpikes(std::size_t layer) const {
    return spikes_[layer];
  }
  std::span<const NeuronState> OutputStates() const { return states_.back(); }
  std::span<const NeuronState> LayerStates(std::size_t layer) const {
    return states_[layer];
  }
  // Synaptic drive each layer received on the last step.
  std::span<const std::int64_t> LayerDrive(std::size_t layer) const {
    return drive_[layer];
  }

 private:
  void Propagate(std::size_t layer, std::span<const std::uint32_t> in);

  const Network* network_;
  std::vector<std::uint32_t> input_spikes_;
  std::vector<std::vector<NeuronState>> states_;
  std::vector<std::vector<std::int64_t>> drive_;
  std::vector<std::vector<std::uint32_t>> spikes_;
};

// Runs a full window from rest and returns the output-layer spike counts.
SpikeCounter ForwardWindow(const Network& network, const SpikeFrames& frames);

// Argmax of counts, lowest index on ties. Requires at least one neuron.
std::size_t Classify(const SpikeCounter& counter);

}  // namespace nfl::snn

#endif  // NFL_SNN_NETWORK_H_
