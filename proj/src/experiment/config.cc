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

#include "nfl/experiment/config.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nfl/error.h"
#include "nfl/quant.h"

namespace nfl::experiment {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void Fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kConfig, field + ": " + what);
}

void Require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) Fail(field, what);
}

// Reads the keys of one JSON object, rejecting any it does not consume.
class Section {
 public:
  Section(const Json& json, std::string path)
      : json_(json), path_(std::move(path)) {
    if (!json_.is_object()) Fail(Name(), "expected an object");
  }

  template <typename T>
  void Get(const char* key, T& out) {
    seen_.insert(key);
    auto it = json_.find(key);
    if (it == json_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) Fail(Name(key), "expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) Fail(Name(key), "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (!it->is_number_unsigned()) Fail(Name(key), "must be >= 0");
          if (it->template get<std::uint64_t>() >
              std::numeric_limits<T>::max()) {
            Fail(Name(key), "out of range");
          }
        } else if (!it->is_number_unsigned()) {
          const auto v = it->template get<std::int64_t>();
          if (v < std::numeric_limits<T>::min() ||
              v > std::numeric_limits<T>::max()) {
            Fail(Name(key), "out of range");
          }
        } else if (it->template get<std::uint64_t>() >
                   static_cast<std::uint64_t>(std::numeric_limits<T>::max())) {
          Fail(Name(key), "out of range");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) Fail(Name(key), "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) Fail(Name(key), "expected a string");
      }
      out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      Fail(Name(key), e.what());
    }
  }

  Section Child(const char* key) {
    seen_.insert(key);
    auto it = json_.find(key);
    return it == json_.end() ? Section(kEmpty, Name(key))
                             : Section(*it, Name(key));
  }

  void Finish() const {
    for (auto it = json_.begin(); it != json_.end(); ++it) {
      if (!seen_.count(it.key())) Fail(Name(it.key()), "unknown key");
    }
  }

 private:
  std::string Name(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  static const Json kEmpty;
  const Json& json_;
  std::string path_;
  std::set<std::string> seen_;
};

const Json Section::kEmpty = Json::object();

void ReadNeuron(Section s, snn::NeuronParams& p) {
  s.Get("current_decay_shift", p.current_decay_shift);
  s.Get("voltage_decay_shift", p.voltage_decay_shift);
  s.Get("threshold", p.threshold);
  s.Get("refractory_steps", p.refractory_steps);
  s.Finish();
}

Json NeuronJson(const snn::NeuronParams& p) {
  return Json{{"current_decay_shift", p.current_decay_shift},
              {"voltage_decay_shift", p.voltage_decay_shift},
              {"threshold", p.threshold},
              {"refractory_steps", p.refractory_steps}};
}

void ValidateNeuron(const snn::NeuronParams& p, const std::string& field) {
  Require(p.current_decay_shift >= 0 && p.current_decay_shift <= 12,
          field + ".current_decay_shift", "must be in [0, 12]");
  Require(p.voltage_decay_shift >= 0 && p.voltage_decay_shift <= 12,
          field + ".voltage_decay_shift", "must be in [0, 12]");
  Require(p.threshold > 0, field + ".threshold", "must be > 0");
  Require(p.refractory_steps >= 0, field + ".refractory_steps",
          "must be >= 0");
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  network.params.hidden = snn::NeuronParams{1, 1, 512, 0};
  network.params.output = snn::NeuronParams{1, 1, 256, 0};
  plasticity.learning_rate_log2 = -6;
}

std::string HiddenNotation(const NetworkConfig& network) {
  if (network.architecture == "desk") return "2a,128";
  if (network.architecture == "full") return "4a,16c5z,2a,32c3z,2a,512";
  return network.architecture;
}

std::uint64_t ComponentSeed(std::uint64_t master, std::string_view component) {
  quant::Rng rng(master, quant::DeriveStream(component));
  return rng.NextU64();
}

void ExperimentConfig::Validate() const {
  // data
  Require(data.width >= 1 && data.width <= 65535, "data.width",
          "must be in [1, 65535]");
  Require(data.height >= 1 && data.height <= 65535, "data.height",
          "must be in [1, 65535]");
  Require(!data.novel_classes.empty(), "data.novel_classes",
          "must not be empty");
  std::set<int> distinct;
  for (int c : data.novel_classes) {
    Require(c >= 0 && c < 10, "data.novel_classes",
            "class " + std::to_string(c) + " is not in [0, 9]");
    Require(distinct.insert(c).second, "data.novel_classes",
            "class " + std::to_string(c) + " listed twice");
  }
  Require(data.dt_us > 0, "data.dt_us", "must be > 0");
  Require(data.duration_us > 0, "data.duration_us", "must be > 0");
  Require(data.noise_rate_hz >= 0 && std::isfinite(data.noise_rate_hz),
          "data.noise_rate_hz", "must be a finite value >= 0");
  Require(data.texture_rate_hz >= 0 && std::isfinite(data.texture_rate_hz),
          "data.texture_rate_hz", "must be a finite value >= 0");
  Require(data.shots_per_class >= 1, "data.shots_per_class", "must be >= 1");
  Require(data.test_size >= 0, "data.test_size", "must be >= 0");
  Require(data.subjects >= 1 && data.subjects <= 65534, "data.subjects",
          "must be in [1, 65534]");
  Require(data.test_subjects >= 1 && data.test_subjects < data.subjects,
          "data.test_subjects", "must be in [1, data.subjects - 1]");
  Require(data.samples_per_subject >= 1, "data.samples_per_subject",
          "must be >= 1");

  // network
  ValidateNeuron(network.params.hidden, "network.hidden_neuron");
  ValidateNeuron(network.params.output, "network.output_neuron");
  Require(network.params.pool_weight > 0, "network.pool_weight", "must be > 0");
  Require(network.hidden_density >= 0 && network.hidden_density <= 1,
          "network.hidden_density", "must be in [0, 1]");
  Require(network.hidden_min_weight >= -128 &&
              network.hidden_min_weight <= network.hidden_max_weight &&
              network.hidden_max_weight <= 126,
          "network.hidden_min_weight",
          "need -128 <= hidden_min_weight <= hidden_max_weight <= 126");
  try {
    const snn::Shape3 input{data.height, data.width, 2};
    auto notation = HiddenNotation(network);
    notation += (notation.empty() ? "" : ",") +
                std::to_string(data.novel_classes.size());
    snn::ParseArchitecture(input, notation).Validate();
  } catch (const Error& e) {
    Fail("network.architecture", e.what());
  }

  // plasticity
  const auto& p = plasticity;
  Require(p.learning_rate_log2 >= -16 && p.learning_rate_log2 <= 8,
          "plasticity.learning_rate_log2", "must be in [-16, 8]");
  Require(p.window >= 1, "plasticity.window", "must be >= 1");
  Require(p.threshold >= 0, "plasticity.threshold", "must be >= 0");
  Require(p.offset >= 0 && p.offset <= plasticity::kRegisterMax,
          "plasticity.offset", "must be in [0, 127]");
  Require(p.trace.alpha1_shift >= 1 && p.trace.alpha1_shift <= 12,
          "plasticity.alpha1_shift", "must be in [1, 12]");
  Require(p.trace.alpha2_shift >= 1 && p.trace.alpha2_shift <= 12,
          "plasticity.alpha2_shift", "must be in [1, 12]");
  Require(p.trace.alpha1_shift != p.trace.alpha2_shift,
          "plasticity.alpha2_shift", "must differ from alpha1_shift");
  Require(p.trace.impulse1 >= 0 && p.trace.impulse1 <= plasticity::kRegisterMax,
          "plasticity.impulse1", "must be in [0, 127]");
  Require(p.trace.impulse2 >= 0 && p.trace.impulse2 <= plasticity::kRegisterMax,
          "plasticity.impulse2", "must be in [0, 127]");
  Require(p.box.u_min <= p.box.u_max, "plasticity.box_min",
          "must be <= plasticity.box_max");
  Require(p.target_active >= 0 && p.target_active <= p.window,
          "plasticity.target_active", "must be in [0, plasticity.window]");
  Require(p.target_inactive >= 0 && p.target_inactive <= p.window,
          "plasticity.target_inactive", "must be in [0, plasticity.window]");

  // federation
  Require(federation.num_clients >= 1, "federation.clients", "must be >= 1");
  Require(federation.local_epochs >= 0, "federation.local_epochs",
          "must be >= 0");
  Require(federation.timeout.count() > 0, "federation.timeout_ms",
          "must be > 0");
  if (federation.transport == fed::TransportKind::kSocket) {
    try {
      fed::SocketAddress::Parse(federation.listen);
    } catch (const Error& e) {
      Fail("federation.listen", e.what());
    }
  }
}

ExperimentConfig ParseConfig(std::string_view text) {
  Json json;
  try {
    json = Json::parse(text, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfig, std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  Section root(json, "");
  root.Get("seed", cfg.seed);

  auto net = root.Child("network");
  net.Get("architecture", cfg.network.architecture);
  net.Get("hidden_weights", cfg.network.hidden_weights);
  net.Get("hidden_density", cfg.network.hidden_density);
  net.Get("hidden_min_weight", cfg.network.hidden_min_weight);
  net.Get("hidden_max_weight", cfg.network.hidden_max_weight);
  net.Get("pool_weight", cfg.network.params.pool_weight);
  ReadNeuron(net.Child("hidden_neuron"), cfg.network.params.hidden);
  ReadNeuron(net.Child("output_neuron"), cfg.network.params.output);
  net.Finish();

  auto pl = root.Child("plasticity");
  auto& p = cfg.plasticity;
  pl.Get("learning_rate_log2", p.learning_rate_log2);
  pl.Get("threshold", p.threshold);
  pl.Get("offset", p.offset);
  pl.Get("window", p.window);
  pl.Get("alpha1_shift", p.trace.alpha1_shift);
  pl.Get("alpha2_shift", p.trace.alpha2_shift);
  pl.Get("impulse1", p.trace.impulse1);
  pl.Get("impulse2", p.trace.impulse2);
  pl.Get("box_enabled", p.box_enabled);
  pl.Get("box_min", p.box.u_min);
  pl.Get("box_max", p.box.u_max);
  pl.Get("target_active", p.target_active);
  pl.Get("target_inactive", p.target_inactive);
  pl.Finish();

  auto fd = root.Child("federation");
  auto& f = cfg.federation;
  fd.Get("clients", f.num_clients);
  fd.Get("rounds", f.rounds);
  fd.Get("local_epochs", f.local_epochs);
  std::string transport = "inproc";
  fd.Get("transport", transport);
  if (transport == "inproc") {
    f.transport = fed::TransportKind::kInProcess;
  } else if (transport == "socket") {
    f.transport = fed::TransportKind::kSocket;
  } else {
    Fail("federation.transport", "expected \"inproc\" or \"socket\"");
  }
  fd.Get("listen", f.listen);
  std::int64_t timeout_ms = f.timeout.count();
  fd.Get("timeout_ms", timeout_ms);
  f.timeout = fed::Milliseconds(timeout_ms);
  fd.Finish();

  auto dt = root.Child("data");
  auto& d = cfg.data;
  dt.Get("width", d.width);
  dt.Get("height", d.height);
  dt.Get("novel_classes", d.novel_classes);
  dt.Get("dt_us", d.dt_us);
  dt.Get("duration_us", d.duration_us);
  dt.Get("noise_rate_hz", d.noise_rate_hz);
  dt.Get("texture_rate_hz", d.texture_rate_hz);
  dt.Get("shots_per_class", d.shots_per_class);
  dt.Get("test_size", d.test_size);
  dt.Get("subjects", d.subjects);
  dt.Get("test_subjects", d.test_subjects);
  dt.Get("samples_per_subject", d.samples_per_subject);
  dt.Finish();

  root.Finish();
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str());
}

std::string ConfigToJson(const ExperimentConfig& cfg) {
  const auto& p = cfg.plasticity;
  const auto& f = cfg.federation;
  const auto& d = cfg.data;
  Json json{
      {"seed", cfg.seed},
      {"network",
       {{"architecture", cfg.network.architecture},
        {"hidden_weights", cfg.network.hidden_weights},
        {"hidden_density", cfg.network.hidden_density},
        {"hidden_min_weight", cfg.network.hidden_min_weight},
        {"hidden_max_weight", cfg.network.hidden_max_weight},
        {"pool_weight", cfg.network.params.pool_weight},
        {"hidden_neuron", NeuronJson(cfg.network.params.hidden)},
        {"output_neuron", NeuronJson(cfg.network.params.output)}}},
      {"plasticity",
       {{"learning_rate_log2", p.learning_rate_log2},
        {"threshold", p.threshold},
        {"offset", p.offset},
        {"window", p.window},
        {"alpha1_shift", p.trace.alpha1_shift},
        {"alpha2_shift", p.trace.alpha2_shift},
        {"impulse1", p.trace.impulse1},
        {"impulse2", p.trace.impulse2},
        {"box_enabled", p.box_enabled},
        {"box_min", p.box.u_min},
        {"box_max", p.box.u_max},
        {"target_active", p.target_active},
        {"target_inactive", p.target_inactive}}},
      {"federation",
       {{"clients", f.num_clients},
        {"rounds", f.rounds},
        {"local_epochs", f.local_epochs},
        {"transport",
         f.transport == fed::TransportKind::kSocket ? "socket" : "inproc"},
        {"listen", f.listen},
        {"timeout_ms", f.timeout.count()}}},
      {"data",
       {{"width", d.width},
        {"height", d.height},
        {"novel_classes", d.novel_classes},
        {"dt_us", d.dt_us},
        {"duration_us", d.duration_us},
        {"noise_rate_hz", d.noise_rate_hz},
        {"texture_rate_hz", d.texture_rate_hz},
        {"shots_per_class", d.shots_per_class},
        {"test_size", d.test_size},
        {"subjects", d.subjects},
        {"test_subjects", d.test_subjects},
        {"samples_per_subject", d.samples_per_subject}}}};
  return json.dump(2) + "\n";
}

}  // namespace nfl::experiment
