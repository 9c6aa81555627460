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

#include "spkcodes/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spkcodes/util.hpp"

namespace spk {

using nlohmann::json;

std::string strategy_name(StrategyKind k) {
  switch (k) {
    case StrategyKind::none: return "none";
    case StrategyKind::bias: return "bias";
    case StrategyKind::scale: return "scale";
    case StrategyKind::affine: return "affine";
    case StrategyKind::level: return "level";
    case StrategyKind::bottle: return "bottle";
    case StrategyKind::lhuc: return "lhuc";
    case StrategyKind::full_finetune: return "full_finetune";
  }
  throw ValidationError("unknown strategy kind");
}

StrategyKind strategy_from_name(const std::string& name) {
  if (name == "none") return StrategyKind::none;
  if (name == "bias") return StrategyKind::bias;
  if (name == "scale") return StrategyKind::scale;
  if (name == "affine") return StrategyKind::affine;
  if (name == "level") return StrategyKind::level;
  if (name == "bottle") return StrategyKind::bottle;
  if (name == "lhuc") return StrategyKind::lhuc;
  if (name == "full_finetune") return StrategyKind::full_finetune;
  throw ValidationError("unknown strategy '" + name + "'");
}

std::string injection_mode_name(InjectionMode m) {
  return m == InjectionMode::nonlinear ? "nonlinear" : "linear";
}

InjectionMode injection_mode_from_name(const std::string& name) {
  if (name == "nonlinear") return InjectionMode::nonlinear;
  if (name == "linear") return InjectionMode::linear;
  throw ValidationError("unknown injection mode '" + name + "'");
}

std::size_t LayerNode::out_dim() const {
  return is_bottleneck() ? bottleneck().out_dim() : dense().out_dim();
}

std::size_t LayerNode::in_dim() const {
  return is_bottleneck() ? bottleneck().in_dim() : dense().in_dim();
}

namespace {

bool uses_scale_code(StrategyKind k) {
  return k == StrategyKind::scale || k == StrategyKind::affine ||
         k == StrategyKind::level || k == StrategyKind::bottle;
}

bool uses_bias_code(StrategyKind k) {
  return k == StrategyKind::bias || k == StrategyKind::affine ||
         k == StrategyKind::level || k == StrategyKind::bottle;
}

void validate_strategy_sizes(const StrategySpec& s) {
  auto require_zero = [&](int v, const char* what) {
    if (v != 0) {
      throw ValidationError("strategy '" + strategy_name(s.kind) +
                            "' does not take a " + what + " size");
    }
  };
  auto require_pos = [&](int v, const char* what) {
    if (v < 1) {
      throw ValidationError("strategy '" + strategy_name(s.kind) +
                            "' requires a positive " + what + " size");
    }
  };
  switch (s.kind) {
    case StrategyKind::none:
    case StrategyKind::lhuc:
    case StrategyKind::full_finetune:
      require_zero(s.scale_dim, "scaling-code");
      require_zero(s.bias_dim, "bias-code");
      require_zero(s.bottleneck_dim, "bottleneck");
      break;
    case StrategyKind::bias:
      require_pos(s.bias_dim, "bias-code");
      require_zero(s.scale_dim, "scaling-code");
      require_zero(s.bottleneck_dim, "bottleneck");
      break;
    case StrategyKind::scale:
      require_pos(s.scale_dim, "scaling-code");
      require_zero(s.bias_dim, "bias-code");
      require_zero(s.bottleneck_dim, "bottleneck");
      break;
    case StrategyKind::affine:
    case StrategyKind::level:
      require_pos(s.scale_dim, "scaling-code");
      require_pos(s.bias_dim, "bias-code");
      require_zero(s.bottleneck_dim, "bottleneck");
      break;
    case StrategyKind::bottle:
      require_pos(s.scale_dim, "scaling-code");
      require_pos(s.bias_dim, "bias-code");
      require_pos(s.bottleneck_dim, "bottleneck");
      break;
  }
}

int layer_in_dim(const NetworkConfig& cfg, int l) {
  return l == 0 ? cfg.input_dim : cfg.hidden_width;
}

int layer_out_dim(const NetworkConfig& cfg, int l) {
  return l == cfg.depth ? cfg.output_dim : cfg.hidden_width;
}

}  // namespace

std::vector<int> resolve_injection(const NetworkConfig& cfg) {
  if (cfg.input_dim < 1 || cfg.output_dim < 1 || cfg.hidden_width < 1) {
    throw ValidationError("network dimensions must be positive");
  }
  if (cfg.depth < 1) throw ValidationError("network depth must be >= 1");
  validate_strategy_sizes(cfg.strategy);

  const StrategyKind kind = cfg.strategy.kind;
  if (kind == StrategyKind::none) {
    if (!cfg.injected_layers.empty()) {
      throw ValidationError("strategy 'none' takes no injected layers");
    }
    return {};
  }

  std::vector<int> inj = cfg.injected_layers;
  if (inj.empty()) {
    if (kind == StrategyKind::level) {
      if (cfg.mode == InjectionMode::nonlinear) {
        // bias at hidden layer ceil(depth/2) (1-based), scaling right after.
        int bias_at = (cfg.depth + 1) / 2 - 1;
        inj = {bias_at, bias_at + 1};
      } else {
        // bias at the last hidden layer, scaling at the final linear layer.
        inj = {cfg.depth - 1, cfg.depth};
      }
    } else if (cfg.mode == InjectionMode::linear) {
      inj = {cfg.depth};
    } else if (kind == StrategyKind::bottle) {
      for (int l = 0; l < cfg.depth; ++l) {
        if (layer_in_dim(cfg, l) == layer_out_dim(cfg, l)) inj.push_back(l);
      }
      if (inj.empty()) {
        throw ValidationError(
            "bottleneck residual dimension mismatch: no hidden layer has "
            "equal input and output width");
      }
    } else {
      for (int l = 0; l < cfg.depth; ++l) inj.push_back(l);
    }
  }

  for (int l : inj) {
    if (l < 0 || l > cfg.depth) {
      throw ValidationError("injected layer " + std::to_string(l) +
                            " out of range for depth " +
                            std::to_string(cfg.depth));
    }
  }
  if (kind == StrategyKind::level) {
    if (inj.size() != 2 || inj[0] == inj[1]) {
      throw ValidationError(
          "strategy 'level' needs exactly two distinct layers "
          "{bias_layer, scale_layer}");
    }
  } else {
    std::vector<int> sorted = inj;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ValidationError("injected layer list contains duplicates");
    }
    inj = sorted;
  }
  if (kind == StrategyKind::bottle) {
    for (int l : inj) {
      if (layer_in_dim(cfg, l) != layer_out_dim(cfg, l)) {
        throw ValidationError(
            "bottleneck residual dimension mismatch at layer " +
            std::to_string(l) + ": input width " +
            std::to_string(layer_in_dim(cfg, l)) + ", output width " +
            std::to_string(layer_out_dim(cfg, l)));
      }
    }
  }
  return inj;
}

Network Network::build(const NetworkConfig& cfg) {
  Network net;
  net.cfg_ = cfg;
  net.injected_ = resolve_injection(cfg);
  net.cfg_.injected_layers = net.injected_;

  const StrategyKind kind = cfg.strategy.kind;
  auto tensor_rng = [&](int layer, const char* tensor) {
    std::string name = "layer" + std::to_string(layer) + "." + tensor;
    return Rng(Rng::mix(cfg.seed, fnv1a64(name)));
  };

  for (int l = 0; l <= cfg.depth; ++l) {
    const int in = layer_in_dim(cfg, l);
    const int out = layer_out_dim(cfg, l);
    const ActivationKind act =
        l == cfg.depth ? ActivationKind::linear : ActivationKind::sigmoid;
    const bool injected =
        std::find(net.injected_.begin(), net.injected_.end(), l) !=
        net.injected_.end();

    LayerNode node;
    if (kind == StrategyKind::bottle && injected) {
      BottleneckLayer bl;
      const int n = cfg.strategy.bottleneck_dim;
      bl.in_proj = Matrix(std::size_t(n), std::size_t(in));
      tensor_rng(l, "in_proj").fill_gaussian(bl.in_proj, 0.0,
                                             1.0 / std::sqrt(double(in)));
      bl.out_proj = Matrix(std::size_t(out), std::size_t(n));
      tensor_rng(l, "out_proj").fill_gaussian(bl.out_proj, 0.0,
                                              1.0 / std::sqrt(double(n)));
      bl.bias = Vector(std::size_t(out), 0.0);
      bl.act = act;
      node.core = std::move(bl);
    } else {
      DenseLayer dl;
      dl.weight = Matrix(std::size_t(out), std::size_t(in));
      tensor_rng(l, "W").fill_gaussian(dl.weight, 0.0,
                                       1.0 / std::sqrt(double(in)));
      dl.bias = Vector(std::size_t(out), 0.0);
      dl.act = act;
      node.core = std::move(dl);
    }

    const bool wants_scale =
        injected && (kind == StrategyKind::scale || kind == StrategyKind::affine ||
                     kind == StrategyKind::bottle ||
                     (kind == StrategyKind::level && l == net.injected_[1]));
    const bool wants_bias =
        injected && (kind == StrategyKind::bias || kind == StrategyKind::affine ||
                     kind == StrategyKind::bottle ||
                     (kind == StrategyKind::level && l == net.injected_[0]));

    if (wants_scale) {
      ScalingAdapter ad;
      const std::size_t rows = kind == StrategyKind::bottle
                                   ? std::size_t(cfg.strategy.bottleneck_dim)
                                   : std::size_t(out);
      ad.proj = Matrix(rows, std::size_t(cfg.strategy.scale_dim));
      tensor_rng(l, "scale_proj").fill_gaussian(ad.proj, 0.0, 0.01);
      // First column is all-ones so the basis-vector starting code gives
      // identity scaling instead of a dead layer.
      for (std::size_t r = 0; r < rows; ++r) ad.proj.at(r, 0) = 1.0;
      node.scale_adapter = std::move(ad);
    }
    if (wants_bias) {
      BiasAdapter ad;
      ad.proj = Matrix(std::size_t(out), std::size_t(cfg.strategy.bias_dim));
      tensor_rng(l, "bias_proj").fill_gaussian(ad.proj, 0.0, 0.01);
      node.bias_adapter = std::move(ad);
    }
    if (kind == StrategyKind::lhuc && injected) node.lhuc = true;
    if (kind == StrategyKind::full_finetune && injected) node.finetuned = true;

    net.layers_.push_back(std::move(node));
  }
  return net;
}

void Network::register_speaker(const std::string& id) {
  if (id.empty()) throw ValidationError("speaker id must be non-empty");
  if (speakers_.count(id)) {
    throw ValidationError("speaker '" + id + "' is already registered");
  }
  SpeakerState st;
  const StrategySpec& s = cfg_.strategy;
  if (uses_scale_code(s.kind)) {
    // Basis-vector start selects the all-ones first column of every scaling
    // projection: identity scaling at step 0.
    st.scale_code = Vector::basis(std::size_t(s.scale_dim), 0);
  }
  if (uses_bias_code(s.kind)) {
    Vector sb(std::size_t(s.bias_dim));
    Rng r(Rng::mix(cfg_.seed, fnv1a64("spk:" + id + ".bias_code")));
    r.fill_gaussian(sb, 0.0, 0.1);
    st.bias_code = std::move(sb);
  }
  if (s.kind == StrategyKind::lhuc) {
    for (int l : injected_) st.lhuc_gains[l] = Vector::ones(layers_[l].out_dim());
  }
  if (s.kind == StrategyKind::full_finetune) {
    for (int l : injected_) st.tuned_layers[l] = layers_[l].dense();
  }
  speakers_[id] = std::move(st);
}

bool Network::has_speaker(const std::string& id) const {
  return speakers_.count(id) != 0;
}

const SpeakerState& Network::require_speaker(const std::string& id) const {
  auto it = speakers_.find(id);
  if (it == speakers_.end()) {
    throw ValidationError("unknown speaker '" + id +
                          "'; adaptation must create codes explicitly");
  }
  return it->second;
}

const SpeakerState& Network::speaker(const std::string& id) const {
  return require_speaker(id);
}

SpeakerState& Network::speaker_mut(const std::string& id) {
  auto it = speakers_.find(id);
  if (it == speakers_.end()) {
    throw ValidationError("unknown speaker '" + id +
                          "'; adaptation must create codes explicitly");
  }
  return it->second;
}

std::vector<std::string> Network::speaker_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : speakers_) ids.push_back(id);
  return ids;
}

void Network::forward_node(int l, const SpeakerState* spk, const Vector& in,
                           LayerCache& cache) const {
  const LayerNode& node = layers_[std::size_t(l)];
  if (node.is_bottleneck()) {
    auto [y, c] = bottleneck_forward(
        node.bottleneck(), *node.scale_adapter,
        node.bias_adapter ? &*node.bias_adapter : nullptr, spk->code(), in);
    cache = std::move(c);
    return;
  }
  const DenseLayer* eff = &node.dense();
  if (node.finetuned && spk != nullptr) {
    auto it = spk->tuned_layers.find(l);
    if (it != spk->tuned_layers.end()) eff = &it->second;
  }
  if (node.scale_adapter || node.bias_adapter) {
    auto [y, c] = factored_forward(
        *eff, node.scale_adapter ? &*node.scale_adapter : nullptr,
        node.bias_adapter ? &*node.bias_adapter : nullptr, spk->code(), in);
    cache = std::move(c);
  } else if (node.lhuc) {
    auto [y, c] = lhuc_forward(*eff, spk->lhuc_gains.at(l), in);
    cache = std::move(c);
  } else {
    auto [y, c] = dense_forward(*eff, in);
    cache = std::move(c);
  }
}

Vector Network::forward(const Vector& x, const std::string& id) const {
  const SpeakerState& spk = require_speaker(id);
  if (x.size() != std::size_t(cfg_.input_dim)) {
    throw ValidationError("forward: input length " + std::to_string(x.size()) +
                          " does not match input_dim " +
                          std::to_string(cfg_.input_dim));
  }
  Vector h = x;
  LayerCache cache;
  for (int l = 0; l <= cfg_.depth; ++l) {
    forward_node(l, &spk, h, cache);
    h = cache.output;
  }
  return h;
}

Vector Network::forward_shared(const Vector& x) const {
  for (const LayerNode& node : layers_) {
    if (node.scale_adapter || node.bias_adapter || node.lhuc) {
      throw ValidationError(
          "forward_shared: network carries speaker adapters; a speaker is "
          "required");
    }
  }
  if (x.size() != std::size_t(cfg_.input_dim)) {
    throw ValidationError("forward_shared: input length " +
                          std::to_string(x.size()) +
                          " does not match input_dim " +
                          std::to_string(cfg_.input_dim));
  }
  Vector h = x;
  LayerCache cache;
  for (int l = 0; l <= cfg_.depth; ++l) {
    forward_node(l, nullptr, h, cache);
    h = cache.output;
  }
  return h;
}

Network::Trace Network::trace(const Vector& x, const std::string& id) const {
  const SpeakerState& spk = require_speaker(id);
  if (x.size() != std::size_t(cfg_.input_dim)) {
    throw ValidationError("trace: input length " + std::to_string(x.size()) +
                          " does not match input_dim " +
                          std::to_string(cfg_.input_dim));
  }
  Trace t;
  t.caches.resize(std::size_t(cfg_.depth) + 1);
  Vector h = x;
  for (int l = 0; l <= cfg_.depth; ++l) {
    forward_node(l, &spk, h, t.caches[std::size_t(l)]);
    h = t.caches[std::size_t(l)].output;
  }
  t.output = h;
  return t;
}

FrameGrads Network::backward(const Trace& t, const Vector& d_output,
                             const std::string& id) const {
  const SpeakerState& spk = require_speaker(id);
  FrameGrads g;
  g.layers.resize(layers_.size());
  Vector upstream = d_output;
  for (int l = cfg_.depth; l >= 0; --l) {
    const LayerNode& node = layers_[std::size_t(l)];
    const LayerCache& cache = t.caches[std::size_t(l)];
    LayerParamGrads& lg = g.layers[std::size_t(l)];
    if (node.is_bottleneck()) {
      BottleneckGrads bg = bottleneck_backward(
          node.bottleneck(), *node.scale_adapter,
          node.bias_adapter ? &*node.bias_adapter : nullptr, spk.code(), cache,
          upstream);
      lg.d_out_proj = std::move(bg.d_out_proj);
      lg.d_in_proj = std::move(bg.d_in_proj);
      lg.d_bias = std::move(bg.d_bias);
      lg.d_scale_proj = std::move(bg.d_scale_proj);
      lg.d_bias_proj = std::move(bg.d_bias_proj);
      if (g.d_scale_code.empty()) g.d_scale_code = Vector(bg.d_scale_code.size());
      add_in_place(g.d_scale_code, bg.d_scale_code);
      if (!bg.d_bias_code.empty()) {
        if (g.d_bias_code.empty()) g.d_bias_code = Vector(bg.d_bias_code.size());
        add_in_place(g.d_bias_code, bg.d_bias_code);
      }
      upstream = std::move(bg.d_input);
      continue;
    }
    const DenseLayer* eff = &node.dense();
    bool speaker_core = false;
    if (node.finetuned) {
      auto it = spk.tuned_layers.find(l);
      if (it != spk.tuned_layers.end()) {
        eff = &it->second;
        speaker_core = true;
      }
    }
    if (node.scale_adapter || node.bias_adapter) {
      FactoredGrads fg = factored_backward(
          *eff, node.scale_adapter ? &*node.scale_adapter : nullptr,
          node.bias_adapter ? &*node.bias_adapter : nullptr, spk.code(), cache,
          upstream);
      lg.d_weight = std::move(fg.d_weight);
      lg.d_bias = std::move(fg.d_bias);
      lg.d_scale_proj = std::move(fg.d_scale_proj);
      lg.d_bias_proj = std::move(fg.d_bias_proj);
      if (!fg.d_scale_code.empty()) {
        if (g.d_scale_code.empty()) g.d_scale_code = Vector(fg.d_scale_code.size());
        add_in_place(g.d_scale_code, fg.d_scale_code);
      }
      if (!fg.d_bias_code.empty()) {
        if (g.d_bias_code.empty()) g.d_bias_code = Vector(fg.d_bias_code.size());
        add_in_place(g.d_bias_code, fg.d_bias_code);
      }
      upstream = std::move(fg.d_input);
    } else if (node.lhuc) {
      LhucGrads hg = lhuc_backward(*eff, spk.lhuc_gains.at(l), cache, upstream);
      lg.d_weight = std::move(hg.d_weight);
      lg.d_bias = std::move(hg.d_bias);
      g.d_lhuc[l] = std::move(hg.d_gain);
      upstream = std::move(hg.d_input);
    } else {
      DenseGrads dg = dense_backward(*eff, cache, upstream);
      lg.d_weight = std::move(dg.d_weight);
      lg.d_bias = std::move(dg.d_bias);
      upstream = std::move(dg.d_input);
    }
    lg.core_is_speaker = speaker_core;
  }
  g.d_input = std::move(upstream);
  return g;
}

ParamCounts Network::count_params() const {
  ParamCounts pc;
  bool any_scale = false, any_bias = false;
  for (const LayerNode& node : layers_) {
    if (node.is_bottleneck()) {
      const BottleneckLayer& b = node.bottleneck();
      pc.shared += b.in_proj.size() + b.out_proj.size() + b.bias.size();
    } else {
      pc.shared += node.dense().weight.size() + node.dense().bias.size();
    }
    if (node.scale_adapter) {
      pc.adapters += node.scale_adapter->proj.size();
      any_scale = true;
    }
    if (node.bias_adapter) {
      pc.adapters += node.bias_adapter->proj.size();
      any_bias = true;
    }
    if (node.lhuc) pc.per_speaker += node.out_dim();
    if (node.finetuned) {
      pc.per_speaker += node.dense().weight.size() + node.dense().bias.size();
    }
  }
  if (any_scale) pc.per_speaker += std::size_t(cfg_.strategy.scale_dim);
  if (any_bias) pc.per_speaker += std::size_t(cfg_.strategy.bias_dim);
  return pc;
}

Network Network::fold_speaker(const std::string& id) const {
  const SpeakerState& spk = require_speaker(id);
  const StrategyKind kind = cfg_.strategy.kind;
  switch (kind) {
    case StrategyKind::bias:
    case StrategyKind::scale:
    case StrategyKind::affine:
    case StrategyKind::level:
    case StrategyKind::lhuc:
      break;
    default:
      throw ValidationError("strategy '" + strategy_name(kind) +
                            "' is not foldable");
  }

  Network folded;
  folded.cfg_ = cfg_;
  folded.cfg_.strategy = StrategySpec{};  // plain network
  folded.cfg_.injected_layers.clear();
  folded.injected_.clear();
  for (const LayerNode& node : layers_) {
    LayerNode plain;
    plain.core = node.dense();
    folded.layers_.push_back(std::move(plain));
  }

  for (int l = 0; l <= cfg_.depth; ++l) {
    const LayerNode& node = layers_[std::size_t(l)];
    DenseLayer& dst = folded.layers_[std::size_t(l)].dense();
    if (node.scale_adapter) {
      Vector a = scaling_from_code(*node.scale_adapter, *spk.scale_code);
      dst.weight = row_scale(a, dst.weight);
    }
    if (node.bias_adapter) {
      Vector b = bias_from_code(*node.bias_adapter, *spk.bias_code);
      add_in_place(dst.bias, b);
    }
    if (node.lhuc) {
      const Vector& gain = spk.lhuc_gains.at(l);
      if (dst.act == ActivationKind::linear) {
        // gain ∘ (W h + c) folds in place.
        dst.weight = row_scale(gain, dst.weight);
        dst.bias = hadamard(gain, dst.bias);
      } else {
        // gain rides through to the next layer's weights.
        DenseLayer& next = folded.layers_[std::size_t(l) + 1].dense();
        next.weight = fold_lhuc(next.weight, gain);
      }
    }
  }
  return folded;
}

// ---- serialization ----

namespace {

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.a}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  m.a = j.at("data").get<std::vector<double>>();
  if (m.a.size() != m.rows * m.cols) {
    throw ValidationError("matrix payload size does not match its shape");
  }
  return m;
}

json vector_to_json(const Vector& v) { return json(v.v); }

Vector vector_from_json(const json& j) {
  Vector v;
  v.v = j.get<std::vector<double>>();
  return v;
}

json config_to_json(const NetworkConfig& cfg) {
  return json{{"input_dim", cfg.input_dim},
              {"output_dim", cfg.output_dim},
              {"hidden_width", cfg.hidden_width},
              {"depth", cfg.depth},
              {"strategy", strategy_name(cfg.strategy.kind)},
              {"scale_dim", cfg.strategy.scale_dim},
              {"bias_dim", cfg.strategy.bias_dim},
              {"bottleneck_dim", cfg.strategy.bottleneck_dim},
              {"mode", injection_mode_name(cfg.mode)},
              {"injected_layers", cfg.injected_layers},
              {"seed", cfg.seed}};
}

NetworkConfig config_from_json(const json& j) {
  NetworkConfig cfg;
  cfg.input_dim = j.at("input_dim").get<int>();
  cfg.output_dim = j.at("output_dim").get<int>();
  cfg.hidden_width = j.at("hidden_width").get<int>();
  cfg.depth = j.at("depth").get<int>();
  cfg.strategy.kind = strategy_from_name(j.at("strategy").get<std::string>());
  cfg.strategy.scale_dim = j.at("scale_dim").get<int>();
  cfg.strategy.bias_dim = j.at("bias_dim").get<int>();
  cfg.strategy.bottleneck_dim = j.at("bottleneck_dim").get<int>();
  cfg.mode = injection_mode_from_name(j.at("mode").get<std::string>());
  cfg.injected_layers = j.at("injected_layers").get<std::vector<int>>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

std::string act_name(ActivationKind a) {
  return a == ActivationKind::sigmoid ? "sigmoid" : "linear";
}

ActivationKind act_from_name(const std::string& s) {
  if (s == "sigmoid") return ActivationKind::sigmoid;
  if (s == "linear") return ActivationKind::linear;
  throw ValidationError("unknown activation '" + s + "'");
}

json dense_to_json(const DenseLayer& d) {
  return json{{"W", matrix_to_json(d.weight)},
              {"c", vector_to_json(d.bias)},
              {"act", act_name(d.act)}};
}

DenseLayer dense_from_json(const json& j) {
  DenseLayer d;
  d.weight = matrix_from_json(j.at("W"));
  d.bias = vector_from_json(j.at("c"));
  d.act = act_from_name(j.at("act").get<std::string>());
  return d;
}

}  // namespace

json Network::to_json() const {
  json layers = json::array();
  for (const LayerNode& node : layers_) {
    json jn;
    if (node.is_bottleneck()) {
      const BottleneckLayer& b = node.bottleneck();
      jn["kind"] = "bottleneck";
      jn["in_proj"] = matrix_to_json(b.in_proj);
      jn["out_proj"] = matrix_to_json(b.out_proj);
      jn["c"] = vector_to_json(b.bias);
      jn["act"] = act_name(b.act);
    } else {
      jn["kind"] = "dense";
      jn["dense"] = dense_to_json(node.dense());
    }
    if (node.scale_adapter) jn["scale_proj"] = matrix_to_json(node.scale_adapter->proj);
    if (node.bias_adapter) jn["bias_proj"] = matrix_to_json(node.bias_adapter->proj);
    if (node.lhuc) jn["lhuc"] = true;
    if (node.finetuned) jn["finetuned"] = true;
    layers.push_back(std::move(jn));
  }

  json speakers = json::object();
  for (const auto& [id, st] : speakers_) {
    json js;
    if (st.scale_code) js["scale_code"] = vector_to_json(*st.scale_code);
    if (st.bias_code) js["bias_code"] = vector_to_json(*st.bias_code);
    if (!st.lhuc_gains.empty()) {
      json gains = json::object();
      for (const auto& [l, g] : st.lhuc_gains) gains[std::to_string(l)] = vector_to_json(g);
      js["lhuc_gains"] = std::move(gains);
    }
    if (!st.tuned_layers.empty()) {
      json tuned = json::object();
      for (const auto& [l, d] : st.tuned_layers) tuned[std::to_string(l)] = dense_to_json(d);
      js["tuned_layers"] = std::move(tuned);
    }
    speakers[id] = std::move(js);
  }

  return json{{"format", "spkcodes-network-v1"},
              {"config", config_to_json(cfg_)},
              {"layers", std::move(layers)},
              {"speakers", std::move(speakers)}};
}

Network Network::from_json(const json& j) {
  if (j.at("format").get<std::string>() != "spkcodes-network-v1") {
    throw ValidationError("unrecognized network format");
  }
  Network net;
  net.cfg_ = config_from_json(j.at("config"));
  net.injected_ = net.cfg_.injected_layers;
  for (const json& jn : j.at("layers")) {
    LayerNode node;
    if (jn.at("kind").get<std::string>() == "bottleneck") {
      BottleneckLayer b;
      b.in_proj = matrix_from_json(jn.at("in_proj"));
      b.out_proj = matrix_from_json(jn.at("out_proj"));
      b.bias = vector_from_json(jn.at("c"));
      b.act = act_from_name(jn.at("act").get<std::string>());
      node.core = std::move(b);
    } else {
      node.core = dense_from_json(jn.at("dense"));
    }
    if (jn.contains("scale_proj")) {
      node.scale_adapter = ScalingAdapter{matrix_from_json(jn.at("scale_proj"))};
    }
    if (jn.contains("bias_proj")) {
      node.bias_adapter = BiasAdapter{matrix_from_json(jn.at("bias_proj"))};
    }
    node.lhuc = jn.value("lhuc", false);
    node.finetuned = jn.value("finetuned", false);
    net.layers_.push_back(std::move(node));
  }
  if (net.layers_.size() != std::size_t(net.cfg_.depth) + 1) {
    throw ValidationError("layer count does not match configured depth");
  }
  for (const auto& [id, js] : j.at("speakers").items()) {
    SpeakerState st;
    if (js.contains("scale_code")) st.scale_code = vector_from_json(js.at("scale_code"));
    if (js.contains("bias_code")) st.bias_code = vector_from_json(js.at("bias_code"));
    if (js.contains("lhuc_gains")) {
      for (const auto& [l, g] : js.at("lhuc_gains").items()) {
        st.lhuc_gains[std::stoi(l)] = vector_from_json(g);
      }
    }
    if (js.contains("tuned_layers")) {
      for (const auto& [l, d] : js.at("tuned_layers").items()) {
        st.tuned_layers[std::stoi(l)] = dense_from_json(d);
      }
    }
    net.speakers_[id] = std::move(st);
  }
  return net;
}

void Network::save(const std::string& path) const {
  write_file(path, to_json().dump(1));
}

Network Network::load(const std::string& path) {
  return from_json(json::parse(read_file(path)));
}

std::vector<TensorRef> Network::shared_tensors() {
  std::vector<TensorRef> out;
  for (int l = 0; l <= cfg_.depth; ++l) {
    LayerNode& node = layers_[std::size_t(l)];
    const std::string base = "layer" + std::to_string(l) + ".";
    if (node.is_bottleneck()) {
      BottleneckLayer& b = std::get<BottleneckLayer>(node.core);
      out.push_back({base + "in_proj", ParamGroup::shared, "", l,
                     b.in_proj.data(), b.in_proj.size()});
      out.push_back({base + "out_proj", ParamGroup::shared, "", l,
                     b.out_proj.data(), b.out_proj.size()});
      out.push_back({base + "c", ParamGroup::shared, "", l, b.bias.data(),
                     b.bias.size()});
    } else {
      DenseLayer& d = node.dense();
      out.push_back({base + "W", ParamGroup::shared, "", l, d.weight.data(),
                     d.weight.size()});
      out.push_back({base + "c", ParamGroup::shared, "", l, d.bias.data(),
                     d.bias.size()});
    }
    if (node.scale_adapter) {
      out.push_back({base + "scale_proj", ParamGroup::adapter, "", l,
                     node.scale_adapter->proj.data(),
                     node.scale_adapter->proj.size()});
    }
    if (node.bias_adapter) {
      out.push_back({base + "bias_proj", ParamGroup::adapter, "", l,
                     node.bias_adapter->proj.data(),
                     node.bias_adapter->proj.size()});
    }
  }
  return out;
}

std::vector<TensorRef> Network::speaker_tensors(const std::string& id) {
  SpeakerState& st = speaker_mut(id);
  std::vector<TensorRef> out;
  const std::string base = "spk:" + id + ".";
  if (st.scale_code) {
    out.push_back({base + "scale_code", ParamGroup::speaker, id, -1,
                   st.scale_code->data(), st.scale_code->size()});
  }
  if (st.bias_code) {
    out.push_back({base + "bias_code", ParamGroup::speaker, id, -1,
                   st.bias_code->data(), st.bias_code->size()});
  }
  for (auto& [l, g] : st.lhuc_gains) {
    out.push_back({base + "lhuc" + std::to_string(l), ParamGroup::speaker, id,
                   l, g.data(), g.size()});
  }
  for (auto& [l, d] : st.tuned_layers) {
    const std::string lb = base + "layer" + std::to_string(l) + ".";
    out.push_back({lb + "W", ParamGroup::speaker, id, l, d.weight.data(),
                   d.weight.size()});
    out.push_back({lb + "c", ParamGroup::speaker, id, l, d.bias.data(),
                   d.bias.size()});
  }
  return out;
}

bool Network::params_equal(const Network& other) const {
  return to_json() == other.to_json();
}

}  // namespace spk
