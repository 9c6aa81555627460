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

#include "spkcodes/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

namespace spk {

std::string trainable_set_name(TrainableSet s) {
  switch (s) {
    case TrainableSet::codes_only: return "codes_only";
    case TrainableSet::codes_and_layer_k: return "codes_and_layer_k";
    case TrainableSet::full_finetune_layers: return "full_finetune_layers";
  }
  throw ValidationError("unknown trainable set");
}

TrainableSet trainable_set_from_name(const std::string& name) {
  if (name == "codes_only") return TrainableSet::codes_only;
  if (name == "codes_and_layer_k") return TrainableSet::codes_and_layer_k;
  if (name == "full_finetune_layers") return TrainableSet::full_finetune_layers;
  throw ValidationError("unknown trainable set '" + name + "'");
}

std::string history_csv(const TrainHistory& h) {
  std::ostringstream out;
  out << "epoch,train_loss,valid_loss,seconds\n";
  for (std::size_t i = 0; i < h.train_loss.size(); ++i) {
    out << i << "," << format_g17(h.train_loss[i]) << ","
        << format_g17(h.valid_loss[i]) << "," << format_g17(h.seconds[i])
        << "\n";
  }
  return out.str();
}

double mse_loss(const Vector& pred, const Vector& target) {
  if (pred.size() != target.size()) {
    throw ValidationError("mse_loss: length mismatch " +
                          std::to_string(pred.size()) + " vs " +
                          std::to_string(target.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return s / double(pred.size());
}

Vector mse_loss_grad(const Vector& pred, const Vector& target) {
  if (pred.size() != target.size()) {
    throw ValidationError("mse_loss_grad: length mismatch " +
                          std::to_string(pred.size()) + " vs " +
                          std::to_string(target.size()));
  }
  Vector g(pred.size());
  const double scale = 2.0 / double(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    g[i] = scale * (pred[i] - target[i]);
  }
  return g;
}

void GradAccumulator::init(Network& net, const std::vector<std::string>& ids) {
  layers.clear();
  speakers.clear();
  for (const LayerNode& node : net.layers()) {
    LayerParamGrads lg;
    if (node.is_bottleneck()) {
      const BottleneckLayer& b = node.bottleneck();
      lg.d_in_proj = Matrix(b.in_proj.rows, b.in_proj.cols, 0.0);
      lg.d_out_proj = Matrix(b.out_proj.rows, b.out_proj.cols, 0.0);
      lg.d_bias = Vector(b.bias.size(), 0.0);
    } else {
      const DenseLayer& d = node.dense();
      lg.d_weight = Matrix(d.weight.rows, d.weight.cols, 0.0);
      lg.d_bias = Vector(d.bias.size(), 0.0);
    }
    if (node.scale_adapter) {
      lg.d_scale_proj =
          Matrix(node.scale_adapter->proj.rows, node.scale_adapter->proj.cols, 0.0);
    }
    if (node.bias_adapter) {
      lg.d_bias_proj =
          Matrix(node.bias_adapter->proj.rows, node.bias_adapter->proj.cols, 0.0);
    }
    layers.push_back(std::move(lg));
  }
  for (const std::string& id : ids) {
    const SpeakerState& st = net.speaker(id);
    SpeakerGrads sg;
    if (st.scale_code) sg.d_scale_code = Vector(st.scale_code->size(), 0.0);
    if (st.bias_code) sg.d_bias_code = Vector(st.bias_code->size(), 0.0);
    for (const auto& [l, g] : st.lhuc_gains) sg.d_lhuc[l] = Vector(g.size(), 0.0);
    for (const auto& [l, d] : st.tuned_layers) {
      sg.d_tuned[l] = {Matrix(d.weight.rows, d.weight.cols, 0.0),
                       Vector(d.bias.size(), 0.0)};
    }
    speakers[id] = std::move(sg);
  }
}

namespace {

void add_matrix(Matrix& dst, const Matrix& src) {
  for (std::size_t i = 0; i < dst.a.size(); ++i) dst.a[i] += src.a[i];
}

void scale_matrix(Matrix& m, double s) {
  for (auto& x : m.a) x *= s;
}

}  // namespace

void GradAccumulator::zero() {
  for (LayerParamGrads& lg : layers) {
    std::fill(lg.d_weight.a.begin(), lg.d_weight.a.end(), 0.0);
    std::fill(lg.d_bias.begin(), lg.d_bias.end(), 0.0);
    std::fill(lg.d_in_proj.a.begin(), lg.d_in_proj.a.end(), 0.0);
    std::fill(lg.d_out_proj.a.begin(), lg.d_out_proj.a.end(), 0.0);
    std::fill(lg.d_scale_proj.a.begin(), lg.d_scale_proj.a.end(), 0.0);
    std::fill(lg.d_bias_proj.a.begin(), lg.d_bias_proj.a.end(), 0.0);
  }
  for (auto& [id, sg] : speakers) {
    std::fill(sg.d_scale_code.begin(), sg.d_scale_code.end(), 0.0);
    std::fill(sg.d_bias_code.begin(), sg.d_bias_code.end(), 0.0);
    for (auto& [l, g] : sg.d_lhuc) std::fill(g.begin(), g.end(), 0.0);
    for (auto& [l, wz] : sg.d_tuned) {
      std::fill(wz.first.a.begin(), wz.first.a.end(), 0.0);
      std::fill(wz.second.begin(), wz.second.end(), 0.0);
    }
  }
}

void GradAccumulator::add_frame(const FrameGrads& fg, const std::string& id) {
  auto it = speakers.find(id);
  if (it == speakers.end()) {
    throw ValidationError("gradient accumulator has no slot for speaker '" +
                          id + "'");
  }
  SpeakerGrads& sg = it->second;
  for (std::size_t l = 0; l < fg.layers.size(); ++l) {
    const LayerParamGrads& src = fg.layers[l];
    LayerParamGrads& dst = layers[l];
    if (src.core_is_speaker) {
      auto& [dw, dc] = sg.d_tuned.at(int(l));
      add_matrix(dw, src.d_weight);
      add_in_place(dc, src.d_bias);
    } else {
      if (!src.d_weight.a.empty()) add_matrix(dst.d_weight, src.d_weight);
      if (!src.d_bias.empty()) add_in_place(dst.d_bias, src.d_bias);
      if (!src.d_in_proj.a.empty()) add_matrix(dst.d_in_proj, src.d_in_proj);
      if (!src.d_out_proj.a.empty()) add_matrix(dst.d_out_proj, src.d_out_proj);
    }
    if (!src.d_scale_proj.a.empty()) add_matrix(dst.d_scale_proj, src.d_scale_proj);
    if (!src.d_bias_proj.a.empty()) add_matrix(dst.d_bias_proj, src.d_bias_proj);
  }
  if (!fg.d_scale_code.empty()) add_in_place(sg.d_scale_code, fg.d_scale_code);
  if (!fg.d_bias_code.empty()) add_in_place(sg.d_bias_code, fg.d_bias_code);
  for (const auto& [l, g] : fg.d_lhuc) add_in_place(sg.d_lhuc.at(l), g);
}

void GradAccumulator::scale(double s) {
  for (LayerParamGrads& lg : layers) {
    scale_matrix(lg.d_weight, s);
    scale_in_place(lg.d_bias, s);
    scale_matrix(lg.d_in_proj, s);
    scale_matrix(lg.d_out_proj, s);
    scale_matrix(lg.d_scale_proj, s);
    scale_matrix(lg.d_bias_proj, s);
  }
  for (auto& [id, sg] : speakers) {
    scale_in_place(sg.d_scale_code, s);
    scale_in_place(sg.d_bias_code, s);
    for (auto& [l, g] : sg.d_lhuc) scale_in_place(g, s);
    for (auto& [l, wz] : sg.d_tuned) {
      scale_matrix(wz.first, s);
      scale_in_place(wz.second, s);
    }
  }
}

std::vector<ParamGradPair> collect_trainable(Network& net, GradAccumulator& acc,
                                             const TrainScope& scope) {
  std::vector<ParamGradPair> out;
  const auto& nodes = net.layers();
  if (acc.layers.size() != nodes.size()) {
    throw ValidationError("gradient accumulator does not match the network");
  }
  for (std::size_t l = 0; l < nodes.size(); ++l) {
    LayerNode& node = net.layers_mut()[l];
    LayerParamGrads& lg = acc.layers[l];
    const std::string base = "layer" + std::to_string(l) + ".";
    if (scope.shared) {
      if (node.is_bottleneck()) {
        BottleneckLayer& b = std::get<BottleneckLayer>(node.core);
        out.push_back({base + "in_proj", ParamGroup::shared, b.in_proj.data(),
                       lg.d_in_proj.data(), b.in_proj.size()});
        out.push_back({base + "out_proj", ParamGroup::shared, b.out_proj.data(),
                       lg.d_out_proj.data(), b.out_proj.size()});
        out.push_back({base + "c", ParamGroup::shared, b.bias.data(),
                       lg.d_bias.data(), b.bias.size()});
      } else {
        DenseLayer& d = node.dense();
        out.push_back({base + "W", ParamGroup::shared, d.weight.data(),
                       lg.d_weight.data(), d.weight.size()});
        out.push_back({base + "c", ParamGroup::shared, d.bias.data(),
                       lg.d_bias.data(), d.bias.size()});
      }
    }
    const bool adapters_here =
        scope.adapters &&
        (!scope.adapter_layer_only || *scope.adapter_layer_only == int(l));
    if (adapters_here && node.scale_adapter) {
      out.push_back({base + "scale_proj", ParamGroup::adapter,
                     node.scale_adapter->proj.data(), lg.d_scale_proj.data(),
                     node.scale_adapter->proj.size()});
    }
    if (adapters_here && node.bias_adapter) {
      out.push_back({base + "bias_proj", ParamGroup::adapter,
                     node.bias_adapter->proj.data(), lg.d_bias_proj.data(),
                     node.bias_adapter->proj.size()});
    }
  }
  std::vector<std::string> ids = scope.speakers;
  std::sort(ids.begin(), ids.end());
  for (const std::string& id : ids) {
    SpeakerState& st = net.speaker_mut(id);
    auto sit = acc.speakers.find(id);
    if (sit == acc.speakers.end()) {
      throw ValidationError("gradient accumulator has no slot for speaker '" +
                            id + "'");
    }
    SpeakerGrads& sg = sit->second;
    const std::string base = "spk:" + id + ".";
    if (st.scale_code) {
      out.push_back({base + "scale_code", ParamGroup::speaker,
                     st.scale_code->data(), sg.d_scale_code.data(),
                     st.scale_code->size()});
    }
    if (st.bias_code) {
      out.push_back({base + "bias_code", ParamGroup::speaker,
                     st.bias_code->data(), sg.d_bias_code.data(),
                     st.bias_code->size()});
    }
    for (auto& [l, g] : st.lhuc_gains) {
      out.push_back({base + "lhuc" + std::to_string(l), ParamGroup::speaker,
                     g.data(), sg.d_lhuc.at(l).data(), g.size()});
    }
    for (auto& [l, d] : st.tuned_layers) {
      auto& [dw, dc] = sg.d_tuned.at(l);
      const std::string lb = base + "layer" + std::to_string(l) + ".";
      out.push_back({lb + "W", ParamGroup::speaker, d.weight.data(), dw.data(),
                     d.weight.size()});
      out.push_back({lb + "c", ParamGroup::speaker, d.bias.data(), dc.data(),
                     d.bias.size()});
    }
  }
  return out;
}

Adam::Adam(const std::vector<ParamGradPair>& pairs, const TrainConfig& cfg)
    : lr_(cfg.learning_rate),
      beta1_(cfg.beta1),
      beta2_(cfg.beta2),
      eps_(cfg.epsilon) {
  for (const auto& p : pairs) {
    m_.emplace_back(p.size, 0.0);
    v_.emplace_back(p.size, 0.0);
  }
}

void Adam::step(const std::vector<ParamGradPair>& pairs) {
  if (pairs.size() != m_.size()) {
    throw ValidationError("optimizer state does not match the parameter set");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, double(t_));
  const double bc2 = 1.0 - std::pow(beta2_, double(t_));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const ParamGradPair& p = pairs[i];
    double* m = m_[i].data();
    double* v = v_[i].data();
    for (std::size_t j = 0; j < p.size; ++j) {
      const double g = p.grad[j];
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p.param[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void copy_params(Network& dst, Network& src) {
  auto dp = dst.shared_tensors();
  auto sp = src.shared_tensors();
  if (dp.size() != sp.size()) {
    throw ValidationError("copy_params: mismatched network structure");
  }
  for (std::size_t i = 0; i < dp.size(); ++i) {
    std::copy(sp[i].data, sp[i].data + sp[i].size, dp[i].data);
  }
  for (const std::string& id : dst.speaker_ids()) {
    auto dsp = dst.speaker_tensors(id);
    auto ssp = src.speaker_tensors(id);
    if (dsp.size() != ssp.size()) {
      throw ValidationError("copy_params: mismatched speaker state for '" + id +
                            "'");
    }
    for (std::size_t i = 0; i < dsp.size(); ++i) {
      std::copy(ssp[i].data, ssp[i].data + ssp[i].size, dsp[i].data);
    }
  }
}

double frame_loss(const Network& net, const Frame& frame,
                  const std::string& speaker) {
  return mse_loss(net.forward(frame.x, speaker), frame.y);
}

double frames_rmse(const Network& net, const std::vector<const Frame*>& frames,
                   const std::string* speaker_override) {
  if (frames.empty()) throw ValidationError("frames_rmse: empty frame set");
  double sq = 0.0;
  std::size_t count = 0;
  for (const Frame* f : frames) {
    const std::string& spk = speaker_override ? *speaker_override : f->speaker;
    Vector pred = net.forward(f->x, spk);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double d = pred[i] - f->y[i];
      sq += d * d;
    }
    count += pred.size();
  }
  return std::sqrt(sq / double(count));
}

namespace {

struct EpochPlan {
  std::vector<std::size_t> order;
};

EpochPlan plan_epoch(std::size_t n, bool shuffle, std::uint64_t seed, int epoch) {
  EpochPlan p;
  p.order.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.order[i] = i;
  if (shuffle) {
    Rng rng(Rng::mix(seed, std::uint64_t(epoch) + 0x5157ULL));
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = rng.next_index(i);
      std::swap(p.order[i - 1], p.order[j]);
    }
  }
  return p;
}

double mean_loss(const Network& net, const std::vector<const Frame*>& frames,
                 const std::string* speaker_override = nullptr) {
  double s = 0.0;
  for (const Frame* f : frames) {
    const std::string& spk = speaker_override ? *speaker_override : f->speaker;
    s += mse_loss(net.forward(f->x, spk), f->y);
  }
  return s / double(frames.size());
}

// Shared minibatch loop for both training entry points. Returns the history;
// the best-validation parameters are restored into `net` before returning.
TrainHistory run_optimization(Network& net,
                              const std::vector<const Frame*>& train_frames,
                              const std::vector<const Frame*>& valid_frames,
                              const TrainScope& scope, const TrainConfig& cfg,
                              const std::string* speaker_override) {
  GradAccumulator acc;
  acc.init(net, scope.speakers);
  std::vector<ParamGradPair> pairs = collect_trainable(net, acc, scope);
  Adam opt(pairs, cfg);

  TrainHistory hist;
  hist.best_valid = std::numeric_limits<double>::infinity();
  Network best = net;  // snapshot storage
  bool have_best = false;
  int since_best = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochPlan plan = plan_epoch(train_frames.size(), cfg.shuffle, cfg.seed, epoch);
    double loss_sum = 0.0;
    std::size_t done = 0;
    while (done < plan.order.size()) {
      const std::size_t batch_end =
          std::min(done + std::size_t(cfg.batch_size), plan.order.size());
      const std::size_t bn = batch_end - done;
      acc.zero();
      for (std::size_t k = done; k < batch_end; ++k) {
        const Frame& f = *train_frames[plan.order[k]];
        const std::string& spk =
            speaker_override ? *speaker_override : f.speaker;
        Network::Trace tr = net.trace(f.x, spk);
        loss_sum += mse_loss(tr.output, f.y);
        FrameGrads fg = net.backward(tr, mse_loss_grad(tr.output, f.y), spk);
        acc.add_frame(fg, spk);
      }
      acc.scale(1.0 / double(bn));
      opt.step(pairs);
      done = batch_end;
    }
    const double train_loss = loss_sum / double(train_frames.size());
    const double monitored =
        valid_frames.empty()
            ? train_loss
            : mean_loss(net, valid_frames, speaker_override);
    const auto t1 = std::chrono::steady_clock::now();
    hist.train_loss.push_back(train_loss);
    hist.valid_loss.push_back(monitored);
    hist.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());

    if (monitored < hist.best_valid) {
      hist.best_valid = monitored;
      hist.best_epoch = epoch;
      copy_params(best, net);
      have_best = true;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best > cfg.patience) break;
    }
  }
  if (have_best) copy_params(net, best);
  return hist;
}

void validate_train_config(const TrainConfig& cfg, bool allow_zero_epochs) {
  if (cfg.epochs < (allow_zero_epochs ? 0 : 1)) {
    throw ValidationError("train config: epochs must be >= " +
                          std::string(allow_zero_epochs ? "0" : "1"));
  }
  if (!(cfg.learning_rate > 0.0)) {
    throw ValidationError("train config: learning rate must be > 0");
  }
  if (cfg.batch_size < 1) {
    throw ValidationError("train config: batch size must be >= 1");
  }
  if (cfg.patience < 0) {
    throw ValidationError("train config: patience must be >= 0");
  }
}

}  // namespace

TrainHistory train_multispeaker(Network& net, const SpeakerDataset& data,
                                const TrainConfig& cfg) {
  validate_train_config(cfg, false);
  std::vector<const Frame*> train_frames = data.select_seen(Split::train);
  if (train_frames.empty()) {
    throw ValidationError("train_multispeaker: dataset has no seen-speaker "
                          "training frames");
  }
  std::set<std::string> speakers_in_data;
  for (const Frame* f : train_frames) speakers_in_data.insert(f->speaker);
  for (const std::string& id : speakers_in_data) {
    if (!net.has_speaker(id)) {
      throw ValidationError("train_multispeaker: speaker '" + id +
                            "' in data is not registered in the network");
    }
  }
  std::vector<const Frame*> valid_frames = data.select_seen(Split::valid);

  TrainScope scope;
  scope.shared = true;
  scope.adapters = true;
  scope.speakers.assign(speakers_in_data.begin(), speakers_in_data.end());
  return run_optimization(net, train_frames, valid_frames, scope, cfg, nullptr);
}

SpeakerState adapt_speaker(Network& net, const std::string& id,
                           const std::vector<const Frame*>& adapt_frames,
                           const std::vector<const Frame*>& valid_frames,
                           const AdaptConfig& cfg) {
  validate_train_config(cfg.base, true);
  if (net.has_speaker(id)) {
    throw ValidationError("adapt_speaker: speaker '" + id +
                          "' is already registered");
  }
  if (adapt_frames.empty()) {
    throw ValidationError("adapt_speaker: empty adaptation data");
  }
  const std::string& source = adapt_frames.front()->speaker;
  for (const Frame* f : adapt_frames) {
    if (f->speaker != source) {
      throw ValidationError(
          "adapt_speaker: adaptation data mixes multiple speakers");
    }
  }

  const StrategyKind kind = net.config().strategy.kind;
  TrainScope scope;
  scope.shared = false;
  scope.adapters = false;
  scope.speakers = {id};
  switch (cfg.trainable) {
    case TrainableSet::codes_only:
      if (kind == StrategyKind::full_finetune || kind == StrategyKind::none) {
        throw ValidationError("codes_only adaptation needs a code-bearing "
                              "strategy, got '" + strategy_name(kind) + "'");
      }
      break;
    case TrainableSet::codes_and_layer_k: {
      if (kind == StrategyKind::full_finetune || kind == StrategyKind::none ||
          kind == StrategyKind::lhuc) {
        throw ValidationError(
            "codes_and_layer_k adaptation needs adapter projections, got '" +
            strategy_name(kind) + "'");
      }
      int k = cfg.layer_k;
      if (k < 0) k = net.injected_layers().front();
      const auto& inj = net.injected_layers();
      if (std::find(inj.begin(), inj.end(), k) == inj.end()) {
        throw ValidationError("codes_and_layer_k: layer " + std::to_string(k) +
                              " carries no adapter");
      }
      scope.adapters = true;
      scope.adapter_layer_only = k;
      break;
    }
    case TrainableSet::full_finetune_layers:
      if (kind != StrategyKind::full_finetune) {
        throw ValidationError(
            "full_finetune_layers adaptation requires the full_finetune "
            "strategy, got '" + strategy_name(kind) + "'");
      }
      break;
  }

  net.register_speaker(id);
  if (cfg.base.epochs > 0) {
    run_optimization(net, adapt_frames, valid_frames, scope, cfg.base, &id);
  }
  return net.speaker(id);
}

double GradcheckReport::overall() const {
  return std::max(shared.max_rel, std::max(adapters.max_rel, codes.max_rel));
}

GradAccumulator analytic_frame_grads(Network& net, const Frame& frame,
                                     const std::string& speaker) {
  GradAccumulator acc;
  acc.init(net, {speaker});
  Network::Trace tr = net.trace(frame.x, speaker);
  FrameGrads fg = net.backward(tr, mse_loss_grad(tr.output, frame.y), speaker);
  acc.add_frame(fg, speaker);
  return acc;
}

GradcheckReport compare_to_finite_diff(Network& net, const Frame& frame,
                                       const std::string& speaker,
                                       const std::vector<ParamGradPair>& pairs,
                                       double eps, double floor) {
  GradcheckReport report;
  auto group_of = [&](ParamGroup g) -> GradcheckGroup& {
    switch (g) {
      case ParamGroup::shared: return report.shared;
      case ParamGroup::adapter: return report.adapters;
      case ParamGroup::speaker: return report.codes;
    }
    throw ValidationError("unknown parameter group");
  };
  for (const ParamGradPair& p : pairs) {
    GradcheckGroup& grp = group_of(p.group);
    for (std::size_t j = 0; j < p.size; ++j) {
      const double saved = p.param[j];
      p.param[j] = saved + eps;
      const double lp = frame_loss(net, frame, speaker);
      p.param[j] = saved - eps;
      const double lm = frame_loss(net, frame, speaker);
      p.param[j] = saved;
      const double gn = (lp - lm) / (2.0 * eps);
      const double ga = p.grad[j];
      const double rel = std::fabs(ga - gn) /
                         std::max({std::fabs(ga), std::fabs(gn), floor});
      if (rel > grp.max_rel) {
        grp.max_rel = rel;
        grp.worst_tensor = p.name + "[" + std::to_string(j) + "]";
      }
    }
  }
  return report;
}

GradcheckReport gradcheck(Network& net, const Frame& frame, double eps,
                          double floor) {
  const std::string& speaker = frame.speaker;
  GradAccumulator acc = analytic_frame_grads(net, frame, speaker);
  TrainScope scope;
  scope.speakers = {speaker};
  std::vector<ParamGradPair> pairs = collect_trainable(net, acc, scope);
  return compare_to_finite_diff(net, frame, speaker, pairs, eps, floor);
}

}  // namespace spk
