// Copyright (c) 2026 spkcodes authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Network assembly. A network is a stack of hidden sigmoid layers followed
// by one linear output layer. A strategy decides how speaker conditioning
// attaches to the stack:
//   bias          low-rank bias code at the injected layers
//   scale         low-rank scaling code at the injected layers
//   affine        both codes at the same layers
//   level         bias code and scaling code at two different layers
//   bottle        bottleneck factorization with scaled core and residual
//   lhuc          per-speaker post-activation gains
//   full_finetune per-speaker copies of designated layers
//   none          plain network, no speaker-dependent parts
// Injection is either "nonlinear" (at hidden layers, before the squashing
// activation) or "linear" (at the final linear layer, so the map from the
// speaker transform to the output stays linear).

#ifndef SPKCODES_MODEL_HPP_
#define SPKCODES_MODEL_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "spkcodes/layers.hpp"

namespace spk {

enum class StrategyKind {
  none,
  bias,
  scale,
  affine,
  level,
  bottle,
  lhuc,
  full_finetune,
};

std::string strategy_name(StrategyKind k);
StrategyKind strategy_from_name(const std::string& name);

enum class InjectionMode { nonlinear, linear };

std::string injection_mode_name(InjectionMode m);
InjectionMode injection_mode_from_name(const std::string& name);

struct StrategySpec {
  StrategyKind kind = StrategyKind::none;
  int scale_dim = 0;       // p, scaling code length
  int bias_dim = 0;        // q, bias code length
  int bottleneck_dim = 0;  // n, bottleneck width
};

struct NetworkConfig {
  int input_dim = 0;
  int output_dim = 0;
  int hidden_width = 0;
  int depth = 1;  // number of hidden sigmoid layers; one linear layer follows
  StrategySpec strategy;
  InjectionMode mode = InjectionMode::nonlinear;
  // Layer indices receiving the speaker transformation; 0..depth-1 are the
  // hidden layers, index==depth is the output layer. Empty selects the
  // default for the strategy and mode. For 'level' the list is exactly
  // {bias_layer, scale_layer}.
  std::vector<int> injected_layers;
  std::uint64_t seed = 0;
};

// One slot of the layer stack: a dense or bottleneck core plus whatever
// speaker machinery the strategy attached to it.
struct LayerNode {
  std::variant<DenseLayer, BottleneckLayer> core;
  std::optional<ScalingAdapter> scale_adapter;
  std::optional<BiasAdapter> bias_adapter;
  bool lhuc = false;       // speaker gain applied after the activation
  bool finetuned = false;  // speakers own a private copy of the dense core

  bool is_bottleneck() const { return std::holds_alternative<BottleneckLayer>(core); }
  const DenseLayer& dense() const { return std::get<DenseLayer>(core); }
  DenseLayer& dense() { return std::get<DenseLayer>(core); }
  const BottleneckLayer& bottleneck() const { return std::get<BottleneckLayer>(core); }
  std::size_t out_dim() const;
  std::size_t in_dim() const;
};

// Everything a single speaker owns.
struct SpeakerState {
  std::optional<Vector> scale_code;
  std::optional<Vector> bias_code;
  std::map<int, Vector> lhuc_gains;          // layer index -> gain vector
  std::map<int, DenseLayer> tuned_layers;    // layer index -> private copy

  SpeakerCode code() const { return SpeakerCode{scale_code, bias_code}; }
};

struct ParamCounts {
  std::size_t shared = 0;       // dense weights/biases, bottleneck factors
  std::size_t adapters = 0;     // code projection matrices
  std::size_t per_speaker = 0;  // one speaker's codes / gains / copies
  std::size_t total_one_speaker() const { return shared + adapters + per_speaker; }
};

enum class ParamGroup { shared, adapter, speaker };

// A named view of one parameter tensor's storage. Valid while the owning
// Network is alive and its speaker set unchanged.
struct TensorRef {
  std::string name;
  ParamGroup group;
  std::string speaker;  // empty for shared/adapter tensors
  int layer = -1;       // owning layer, -1 for codes
  double* data = nullptr;
  std::size_t size = 0;
};

// Gradients produced by one frame's backward pass.
struct LayerParamGrads {
  Matrix d_weight;      // dense core (shared or the speaker's tuned copy)
  Vector d_bias;
  Matrix d_out_proj;    // bottleneck factors
  Matrix d_in_proj;
  Matrix d_scale_proj;  // adapters
  Matrix d_bias_proj;
  bool core_is_speaker = false;
};

struct FrameGrads {
  std::vector<LayerParamGrads> layers;
  Vector d_scale_code;          // empty when the strategy has no such code
  Vector d_bias_code;
  std::map<int, Vector> d_lhuc;
  Vector d_input;
};

class Network {
 public:
  static Network build(const NetworkConfig& cfg);

  // Forward pass with a registered speaker's conditioning.
  Vector forward(const Vector& x, const std::string& speaker) const;

  // Forward pass through the shared stack only. Valid when no layer carries
  // speaker machinery (vanilla, folded, or full_finetune networks).
  Vector forward_shared(const Vector& x) const;

  struct Trace {
    std::vector<LayerCache> caches;
    Vector output;
  };
  Trace trace(const Vector& x, const std::string& speaker) const;

  // Chain-rule gradients for every parameter reachable from this frame.
  FrameGrads backward(const Trace& t, const Vector& d_output,
                      const std::string& speaker) const;

  // Creates the speaker's codes/gains/copies at their neutral-start values.
  // Initialization draws come from a stream keyed by (config seed, id), so
  // registration order does not matter.
  void register_speaker(const std::string& id);
  bool has_speaker(const std::string& id) const;
  const SpeakerState& speaker(const std::string& id) const;
  SpeakerState& speaker_mut(const std::string& id);
  std::vector<std::string> speaker_ids() const;

  ParamCounts count_params() const;

  // Bakes one speaker's conditioning into plain dense layers. Defined for
  // bias/scale/affine/level/lhuc; bottleneck and full_finetune are rejected.
  Network fold_speaker(const std::string& id) const;

  nlohmann::json to_json() const;
  static Network from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Network load(const std::string& path);

  const NetworkConfig& config() const { return cfg_; }
  const std::vector<LayerNode>& layers() const { return layers_; }
  std::vector<LayerNode>& layers_mut() { return layers_; }
  const std::vector<int>& injected_layers() const { return injected_; }

  // Canonical parameter enumeration; order is stable and documented in the
  // implementation. Shared/adapter tensors first by layer, then the
  // requested speakers' tensors sorted by id.
  std::vector<TensorRef> shared_tensors();
  std::vector<TensorRef> speaker_tensors(const std::string& id);

  // Deep equality of configuration and every parameter bit.
  bool params_equal(const Network& other) const;

 private:
  NetworkConfig cfg_;
  std::vector<int> injected_;  // resolved injection layer indices
  std::vector<LayerNode> layers_;
  std::map<std::string, SpeakerState> speakers_;

  const SpeakerState& require_speaker(const std::string& id) const;
  void forward_node(int layer_idx, const SpeakerState* spk, const Vector& in,
                    LayerCache& cache) const;
};

// Validates a config and resolves the injected layer list (defaults applied).
// Throws ValidationError on invalid strategy/size/placement combinations.
std::vector<int> resolve_injection(const NetworkConfig& cfg);

}  // namespace spk

#endif  // SPKCODES_MODEL_HPP_
