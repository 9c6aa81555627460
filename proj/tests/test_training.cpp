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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "spkcodes/training.hpp"
#include "test_common.hpp"

using namespace spk;
using namespace spk::testing;

namespace {

GenConfig tiny_gen(VariationMode mode = VariationMode::affine,
                   std::uint64_t seed = 9) {
  GenConfig g;
  g.num_seen_speakers = 3;
  g.num_unseen_speakers = 1;
  g.train_frames = 24;
  g.valid_frames = 8;
  g.test_frames = 8;
  g.adapt_frames = 16;
  g.input_dim = 4;
  g.output_dim = 3;
  g.mode = mode;
  g.noise_sigma = 0.01;
  g.seed = seed;
  return g;
}

NetworkConfig net_for(const GenConfig& g, StrategyKind kind, int width,
                      std::uint64_t seed) {
  NetworkConfig cfg;
  cfg.input_dim = g.input_dim;
  cfg.output_dim = g.output_dim;
  cfg.hidden_width = width;
  cfg.depth = 2;
  cfg.mode = InjectionMode::nonlinear;
  cfg.seed = seed;
  switch (kind) {
    case StrategyKind::bias: cfg.strategy = {kind, 0, 4, 0}; break;
    case StrategyKind::scale: cfg.strategy = {kind, 4, 0, 0}; break;
    case StrategyKind::affine: cfg.strategy = {kind, 4, 4, 0}; break;
    default: cfg.strategy = {kind, 0, 0, 0}; break;
  }
  return cfg;
}

Network trained_small_net(const SpeakerDataset& ds, StrategyKind kind,
                          int epochs, TrainHistory* hist_out = nullptr) {
  NetworkConfig ncfg = net_for(ds.cfg, kind, 8, 31);
  Network net = Network::build(ncfg);
  for (const auto& id : ds.seen) net.register_speaker(id);
  TrainConfig tcfg;
  tcfg.epochs = epochs;
  tcfg.batch_size = 8;
  tcfg.learning_rate = 5e-3;
  tcfg.seed = 17;
  TrainHistory h = train_multispeaker(net, ds, tcfg);
  if (hist_out) *hist_out = h;
  return net;
}

std::vector<double> snapshot(Network& net) {
  std::vector<double> vals;
  for (const TensorRef& t : net.shared_tensors()) {
    vals.insert(vals.end(), t.data, t.data + t.size);
  }
  for (const std::string& id : net.speaker_ids()) {
    for (const TensorRef& t : net.speaker_tensors(id)) {
      vals.insert(vals.end(), t.data, t.data + t.size);
    }
  }
  return vals;
}

}  // namespace

TEST_CASE("mse loss examples") {
  CHECK(mse_loss(Vector{1, 2, 3}, Vector{1, 2, 3}) == 0.0);
  CHECK(mse_loss(Vector{0, 0}, Vector{2, 0}) == doctest::Approx(2.0));
  const double a = mse_loss(Vector{0.3, -0.4}, Vector{1.0, 0.25});
  const double b = mse_loss(Vector{-0.3, 0.4}, Vector{-1.0, -0.25});
  CHECK(a == b);
  CHECK_THROWS_AS(mse_loss(Vector{1}, Vector{1, 2}), ValidationError);
}

TEST_CASE("mse gradient matches finite differences") {
  Rng rng(40);
  Vector target = random_vector(rng, 5);
  Vector pred = random_vector(rng, 5);
  Vector g = mse_loss_grad(pred, target);
  Vector fd = finite_diff_grad(
      [&](const Vector& p) { return mse_loss(p, target); }, pred, 1e-6);
  CHECK(max_rel(g, fd) < 1e-6);
}

TEST_CASE("optimizer step with zero gradient leaves parameters unchanged") {
  Network net = Network::build(net_for(tiny_gen(), StrategyKind::affine, 6, 3));
  net.register_speaker("s00");
  GradAccumulator acc;
  acc.init(net, {"s00"});
  TrainScope scope;
  scope.speakers = {"s00"};
  std::vector<ParamGradPair> pairs = collect_trainable(net, acc, scope);
  std::vector<double> before = snapshot(net);
  TrainConfig cfg;
  Adam opt(pairs, cfg);
  opt.step(pairs);
  opt.step(pairs);
  std::vector<double> after = snapshot(net);
  CHECK(bits_equal(before.data(), after.data(), before.size()));
}

TEST_CASE("a width-8 net memorizes one speaker's eight frames") {
  GenConfig g = tiny_gen();
  g.num_seen_speakers = 1;
  g.train_frames = 8;
  g.noise_sigma = 0.0;
  SpeakerDataset ds = generate(g);

  NetworkConfig ncfg = net_for(g, StrategyKind::affine, 8, 5);
  Network net = Network::build(ncfg);
  net.register_speaker("s00");
  TrainConfig tcfg;
  tcfg.epochs = 200;
  tcfg.batch_size = 8;
  tcfg.learning_rate = 1e-2;
  tcfg.patience = 200;  // no early stop, watch the raw trend
  tcfg.seed = 1;
  TrainHistory h = train_multispeaker(net, ds, tcfg);
  REQUIRE(h.train_loss.size() > 1);
  CHECK(h.train_loss.back() < 0.1 * h.train_loss.front());
}

TEST_CASE("training history is deterministic") {
  SpeakerDataset ds = generate(tiny_gen());
  TrainHistory h1, h2;
  trained_small_net(ds, StrategyKind::affine, 12, &h1);
  trained_small_net(ds, StrategyKind::affine, 12, &h2);
  CHECK(h1.train_loss == h2.train_loss);
  CHECK(h1.valid_loss == h2.valid_loss);
  CHECK(h1.best_epoch == h2.best_epoch);
}

TEST_CASE("early stop returns the best validation checkpoint") {
  SpeakerDataset ds = generate(tiny_gen());
  TrainHistory h;
  Network net = trained_small_net(ds, StrategyKind::affine, 60, &h);
  REQUIRE(h.best_epoch >= 0);
  for (double v : h.valid_loss) {
    CHECK(h.valid_loss[std::size_t(h.best_epoch)] <= v);
  }
  // Restored parameters reproduce the recorded best validation loss.
  double sum = 0;
  auto frames = ds.select_seen(Split::valid);
  for (const Frame* f : frames) sum += mse_loss(net.forward(f->x, f->speaker), f->y);
  CHECK(sum / double(frames.size()) ==
        doctest::Approx(h.best_valid).epsilon(1e-12));
}

TEST_CASE("training loss is non-increasing at a small learning rate") {
  GenConfig g = tiny_gen();
  g.num_seen_speakers = 2;
  g.train_frames = 8;
  SpeakerDataset ds = generate(g);
  NetworkConfig ncfg = net_for(g, StrategyKind::affine, 4, 11);
  Network net = Network::build(ncfg);
  for (const auto& id : ds.seen) net.register_speaker(id);
  TrainConfig tcfg;
  tcfg.epochs = 50;
  tcfg.batch_size = 16;
  tcfg.learning_rate = 1e-4;
  tcfg.shuffle = false;
  tcfg.patience = 50;
  TrainHistory h = train_multispeaker(net, ds, tcfg);
  for (std::size_t i = 1; i < h.train_loss.size(); ++i) {
    CHECK(h.train_loss[i] <= h.train_loss[i - 1] * 1.01);
  }
}

TEST_CASE("training validates its inputs") {
  SpeakerDataset ds = generate(tiny_gen());
  Network net = Network::build(net_for(ds.cfg, StrategyKind::affine, 6, 3));
  // seen speakers not registered
  CHECK_THROWS_WITH_AS(train_multispeaker(net, ds, TrainConfig{}),
                       doctest::Contains("not registered"), ValidationError);
  for (const auto& id : ds.seen) net.register_speaker(id);
  TrainConfig bad;
  bad.epochs = 0;
  CHECK_THROWS_AS(train_multispeaker(net, ds, bad), ValidationError);
  SpeakerDataset empty = ds;
  empty.frames.clear();
  CHECK_THROWS_AS(train_multispeaker(net, empty, TrainConfig{}),
                  ValidationError);
}

TEST_CASE("zero-epoch adaptation returns the initialization untouched") {
  SpeakerDataset ds = generate(tiny_gen());
  Network net = trained_small_net(ds, StrategyKind::affine, 6);
  std::vector<double> before = snapshot(net);

  AdaptConfig acfg;
  acfg.base.epochs = 0;
  auto frames = ds.select(ds.unseen.front(), Split::train);
  SpeakerState st = adapt_speaker(net, "fresh", frames, {}, acfg);

  // Code equals the documented deterministic initialization.
  REQUIRE(st.scale_code.has_value());
  Vector e1 = Vector::basis(st.scale_code->size(), 0);
  CHECK(linf(*st.scale_code, e1) == 0.0);
  REQUIRE(st.bias_code.has_value());
  Vector expected(st.bias_code->size());
  Rng r(Rng::mix(net.config().seed, fnv1a64("spk:fresh.bias_code")));
  r.fill_gaussian(expected, 0.0, 0.1);
  CHECK(linf(*st.bias_code, expected) == 0.0);

  // Everything that existed before is bit-identical.
  Network copy = net;  // same speakers incl. "fresh"
  (void)copy;
  std::vector<double> after_shared;
  for (const TensorRef& t : net.shared_tensors()) {
    after_shared.insert(after_shared.end(), t.data, t.data + t.size);
  }
  std::vector<double> before_shared(before.begin(),
                                    before.begin() + after_shared.size());
  CHECK(bits_equal(before_shared.data(), after_shared.data(),
                   after_shared.size()));
}

TEST_CASE("adaptation freezes shared parameters and other speakers") {
  SpeakerDataset ds = generate(tiny_gen());
  Network net = trained_small_net(ds, StrategyKind::affine, 10);

  std::vector<double> shared_before;
  for (const TensorRef& t : net.shared_tensors()) {
    shared_before.insert(shared_before.end(), t.data, t.data + t.size);
  }
  std::vector<double> others_before;
  for (const std::string& id : net.speaker_ids()) {
    for (const TensorRef& t : net.speaker_tensors(id)) {
      others_before.insert(others_before.end(), t.data, t.data + t.size);
    }
  }

  AdaptConfig acfg;
  acfg.base.epochs = 30;
  acfg.base.learning_rate = 1e-2;
  acfg.base.batch_size = 8;
  const std::string id = ds.unseen.front();
  adapt_speaker(net, id, ds.select(id, Split::train),
                ds.select(id, Split::valid), acfg);

  std::vector<double> shared_after;
  for (const TensorRef& t : net.shared_tensors()) {
    shared_after.insert(shared_after.end(), t.data, t.data + t.size);
  }
  CHECK(bits_equal(shared_before.data(), shared_after.data(),
                   shared_after.size()));

  std::vector<double> others_after;
  for (const std::string& sid : net.speaker_ids()) {
    if (sid == id) continue;
    for (const TensorRef& t : net.speaker_tensors(sid)) {
      others_after.insert(others_after.end(), t.data, t.data + t.size);
    }
  }
  CHECK(bits_equal(others_before.data(), others_after.data(),
                   others_after.size()));
}

TEST_CASE("adaptation validates its inputs") {
  SpeakerDataset ds = generate(tiny_gen());
  Network net = trained_small_net(ds, StrategyKind::affine, 6);
  AdaptConfig acfg;
  CHECK_THROWS_WITH_AS(adapt_speaker(net, "s00", ds.select("u00", Split::train),
                                     {}, acfg),
                       doctest::Contains("already registered"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(adapt_speaker(net, "new", {}, {}, acfg),
                       doctest::Contains("empty adaptation data"),
                       ValidationError);
  // Mixed-speaker adaptation sets are rejected.
  auto mixed = ds.select("s00", Split::train);
  auto extra = ds.select("s01", Split::train);
  mixed.push_back(extra.front());
  CHECK_THROWS_WITH_AS(adapt_speaker(net, "new", mixed, {}, acfg),
                       doctest::Contains("multiple speakers"),
                       ValidationError);
  // Selector / strategy consistency.
  Network ft = Network::build(net_for(ds.cfg, StrategyKind::full_finetune, 6, 3));
  for (const auto& sid : ds.seen) ft.register_speaker(sid);
  AdaptConfig codes;
  codes.trainable = TrainableSet::codes_only;
  CHECK_THROWS_AS(adapt_speaker(ft, "new", ds.select("u00", Split::train), {},
                                codes),
                  ValidationError);
  AdaptConfig layers;
  layers.trainable = TrainableSet::full_finetune_layers;
  CHECK_THROWS_AS(adapt_speaker(net, "new2", ds.select("u00", Split::train), {},
                                layers),
                  ValidationError);
}

TEST_CASE("codes_and_layer_k unfreezes only that layer's projections") {
  SpeakerDataset ds = generate(tiny_gen());
  Network net = trained_small_net(ds, StrategyKind::affine, 10);

  auto proj_snapshot = [&](int layer) {
    const LayerNode& node = net.layers()[std::size_t(layer)];
    std::vector<double> vals(node.scale_adapter->proj.a);
    vals.insert(vals.end(), node.bias_adapter->proj.a.begin(),
                node.bias_adapter->proj.a.end());
    return vals;
  };
  std::vector<double> layer0_before = proj_snapshot(0);
  std::vector<double> layer1_before = proj_snapshot(1);

  AdaptConfig acfg;
  acfg.trainable = TrainableSet::codes_and_layer_k;
  acfg.layer_k = 0;
  acfg.base.epochs = 20;
  acfg.base.learning_rate = 1e-2;
  const std::string id = ds.unseen.front();
  adapt_speaker(net, id, ds.select(id, Split::train),
                ds.select(id, Split::valid), acfg);

  std::vector<double> layer0_after = proj_snapshot(0);
  std::vector<double> layer1_after = proj_snapshot(1);
  CHECK(!bits_equal(layer0_before.data(), layer0_after.data(),
                    layer0_after.size()));
  CHECK(bits_equal(layer1_before.data(), layer1_after.data(),
                   layer1_after.size()));

  // Requesting a layer without adapters is rejected.
  AdaptConfig bad = acfg;
  bad.layer_k = 2;  // output layer carries no adapter in nonlinear mode
  CHECK_THROWS_AS(adapt_speaker(net, "other", ds.select(id, Split::train), {},
                                bad),
                  ValidationError);
}

TEST_CASE("full_finetune trains per-speaker copies and adapts them") {
  GenConfig g = tiny_gen();
  SpeakerDataset ds = generate(g);
  NetworkConfig ncfg = net_for(g, StrategyKind::full_finetune, 8, 19);
  Network net = Network::build(ncfg);
  for (const auto& id : ds.seen) net.register_speaker(id);
  TrainConfig tcfg;
  tcfg.epochs = 30;
  tcfg.batch_size = 8;
  tcfg.learning_rate = 5e-3;
  tcfg.seed = 20;
  TrainHistory h = train_multispeaker(net, ds, tcfg);
  CHECK(h.train_loss.back() < h.train_loss.front());
  // Joint training moves the speaker copies away from the shared template.
  const SpeakerState& st = net.speaker("s00");
  const DenseLayer& shared0 = net.layers()[0].dense();
  CHECK(!bits_equal(st.tuned_layers.at(0).weight.data(),
                    shared0.weight.data(), shared0.weight.size()));

  std::vector<double> shared_before;
  for (const TensorRef& t : net.shared_tensors()) {
    shared_before.insert(shared_before.end(), t.data, t.data + t.size);
  }
  AdaptConfig acfg;
  acfg.trainable = TrainableSet::full_finetune_layers;
  acfg.base.epochs = 25;
  acfg.base.learning_rate = 5e-3;
  const std::string id = ds.unseen.front();
  auto frames = ds.select(id, Split::train);
  const double before_rmse = [&] {
    Network probe = net;
    probe.register_speaker(id);
    return frames_rmse(probe, frames, &id);
  }();
  adapt_speaker(net, id, frames, ds.select(id, Split::valid), acfg);
  const double after_rmse = frames_rmse(net, frames, &id);
  CHECK(after_rmse < before_rmse);

  std::vector<double> shared_after;
  for (const TensorRef& t : net.shared_tensors()) {
    shared_after.insert(shared_after.end(), t.data, t.data + t.size);
  }
  CHECK(bits_equal(shared_before.data(), shared_after.data(),
                   shared_after.size()));
}

TEST_CASE("self-adaptation recovers a seen speaker's accuracy") {
  GenConfig g = tiny_gen(VariationMode::affine, 21);
  g.num_seen_speakers = 6;
  g.train_frames = 120;
  g.valid_frames = 40;
  g.test_frames = 60;
  g.noise_sigma = 0.05;
  SpeakerDataset ds = generate(g);

  NetworkConfig ncfg = net_for(g, StrategyKind::affine, 12, 77);
  Network net = Network::build(ncfg);
  for (const auto& id : ds.seen) net.register_speaker(id);
  TrainConfig tcfg;
  tcfg.epochs = 150;
  tcfg.batch_size = 16;
  tcfg.learning_rate = 5e-3;
  tcfg.seed = 78;
  train_multispeaker(net, ds, tcfg);

  const std::string target = "s00";
  auto valid = ds.select(target, Split::valid);
  const double ms_rmse = frames_rmse(net, valid);

  // Re-estimate codes for the same speaker from its held-out test slice.
  AdaptConfig acfg;
  acfg.base.epochs = 300;
  acfg.base.learning_rate = 2e-2;
  acfg.base.batch_size = 16;
  acfg.base.patience = 50;
  acfg.base.seed = 79;
  const std::string clone = "s00_again";
  adapt_speaker(net, clone, ds.select(target, Split::test), valid, acfg);
  const double adapted_rmse = frames_rmse(net, valid, &clone);

  CHECK(adapted_rmse <= 1.25 * ms_rmse);
}

TEST_CASE("gradcheck passes for small nets and catches corruption") {
  SpeakerDataset ds = generate(tiny_gen());
  Network net = Network::build(net_for(ds.cfg, StrategyKind::affine, 4, 51));
  net.register_speaker("s00");
  Rng rng(52);
  SpeakerState& st = net.speaker_mut("s00");
  rng.fill_gaussian(*st.scale_code, 0.0, 1.0);
  rng.fill_gaussian(*st.bias_code, 0.0, 1.0);

  Frame f;
  f.speaker = "s00";
  f.x = random_vector(rng, 4);
  f.y = random_vector(rng, 3);

  GradcheckReport rep = gradcheck(net, f);
  CHECK(rep.ok(1e-5));
  CHECK(rep.shared.max_rel < 1e-5);
  CHECK(rep.adapters.max_rel < 1e-5);
  CHECK(rep.codes.max_rel < 1e-5);

  // Negating the largest analytic entry must be flagged.
  GradAccumulator acc = analytic_frame_grads(net, f, "s00");
  TrainScope scope;
  scope.speakers = {"s00"};
  std::vector<ParamGradPair> pairs = collect_trainable(net, acc, scope);
  double* worst = nullptr;
  double worst_mag = -1.0;
  for (const auto& p : pairs) {
    for (std::size_t j = 0; j < p.size; ++j) {
      if (std::fabs(p.grad[j]) > worst_mag) {
        worst_mag = std::fabs(p.grad[j]);
        worst = &p.grad[j];
      }
    }
  }
  REQUIRE(worst != nullptr);
  *worst = -*worst;
  GradcheckReport bad = compare_to_finite_diff(net, f, "s00", pairs, 1e-6);
  CHECK(!bad.ok(1e-5));
}

TEST_CASE("gradcheck is near-exact when every path is linear") {
  // Bias-strategy networks are per-coordinate linear in every parameter, so
  // central differences are exact up to rounding once the activations are
  // linear; a larger step keeps the rounding term tiny.
  SpeakerDataset ds = generate(tiny_gen());
  Network net = Network::build(net_for(ds.cfg, StrategyKind::bias, 4, 53));
  for (LayerNode& node : net.layers_mut()) {
    node.dense().act = ActivationKind::linear;
  }
  net.register_speaker("s00");
  Rng rng(54);
  rng.fill_gaussian(*net.speaker_mut("s00").bias_code, 0.0, 1.0);
  Frame f;
  f.speaker = "s00";
  f.x = random_vector(rng, 4);
  f.y = random_vector(rng, 3);
  GradcheckReport rep = gradcheck(net, f, 1e-3);
  CHECK(rep.overall() < 1e-8);
}

TEST_CASE("history csv has one row per epoch") {
  TrainHistory h;
  h.train_loss = {1.0, 0.5};
  h.valid_loss = {1.1, 0.6};
  h.seconds = {0.01, 0.01};
  std::string csv = history_csv(h);
  CHECK(csv.find("epoch,train_loss,valid_loss,seconds") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
