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
#include <map>
#include <set>

#include "doctest.h"
#include "spkcodes/synthgen.hpp"
#include "spkcodes/util.hpp"
#include "test_common.hpp"

using namespace spk;
using namespace spk::testing;

namespace {

GenConfig demo_cfg(VariationMode mode, std::uint64_t seed = 3) {
  GenConfig g;
  g.num_seen_speakers = 4;
  g.num_unseen_speakers = 2;
  g.train_frames = 12;
  g.valid_frames = 5;
  g.test_frames = 6;
  g.adapt_frames = 9;
  g.input_dim = 5;
  g.output_dim = 3;
  g.mode = mode;
  g.noise_sigma = 0.02;
  g.seed = seed;
  return g;
}

}  // namespace

TEST_CASE("generation is byte-deterministic") {
  GenConfig cfg = demo_cfg(VariationMode::affine);
  SpeakerDataset a = generate(cfg);
  SpeakerDataset b = generate(cfg);
  CHECK(dataset_meta_json(a) == dataset_meta_json(b));
  CHECK(dataset_frames_csv(a) == dataset_frames_csv(b));
  CHECK(dataset_hash(a) == dataset_hash(b));

  cfg.seed += 1;
  SpeakerDataset c = generate(cfg);
  CHECK(dataset_hash(a) != dataset_hash(c));
}

TEST_CASE("splits and partitions have the configured shape") {
  GenConfig cfg = demo_cfg(VariationMode::affine);
  SpeakerDataset ds = generate(cfg);
  CHECK(ds.seen.size() == 4);
  CHECK(ds.unseen.size() == 2);

  std::map<std::string, std::map<Split, int>> counts;
  for (const Frame& f : ds.frames) counts[f.speaker][f.split]++;
  for (const auto& id : ds.seen) {
    CHECK(counts[id][Split::train] == cfg.train_frames);
    CHECK(counts[id][Split::valid] == cfg.valid_frames);
    CHECK(counts[id][Split::test] == cfg.test_frames);
  }
  for (const auto& id : ds.unseen) {
    CHECK(counts[id][Split::train] == cfg.adapt_frames);
    CHECK(counts[id][Split::valid] == cfg.valid_frames);
    CHECK(counts[id][Split::test] == cfg.test_frames);
  }

  // Unseen speakers never appear in the seen-speaker selections.
  for (Split s : {Split::train, Split::valid, Split::test}) {
    for (const Frame* f : ds.select_seen(s)) {
      CHECK(ds.is_seen(f->speaker));
    }
  }
  // seen/unseen ids are disjoint.
  std::set<std::string> seen_set(ds.seen.begin(), ds.seen.end());
  for (const auto& id : ds.unseen) CHECK(!seen_set.count(id));
}

TEST_CASE("variation mode masks hold exactly") {
  SpeakerDataset scale_ds = generate(demo_cfg(VariationMode::scale));
  for (const auto& [id, lat] : scale_ds.latents) {
    for (double b : lat.beta) CHECK(b == 0.0);
    for (double a : lat.alpha) CHECK(a > 0.0);  // log-normal stays positive
  }
  SpeakerDataset bias_ds = generate(demo_cfg(VariationMode::bias));
  for (const auto& [id, lat] : bias_ds.latents) {
    for (double a : lat.alpha) CHECK(a == 1.0);
  }
}

TEST_CASE("noise-free targets are a pure function of the input") {
  GenConfig cfg = demo_cfg(VariationMode::bias);
  cfg.noise_sigma = 0.0;
  SpeakerDataset ds = generate(cfg);
  for (const Frame& f : ds.frames) {
    Vector again = ds.model.eval_speaker(ds.latents.at(f.speaker), f.x);
    CHECK(linf(f.y, again) == 0.0);
  }
}

TEST_CASE("speakers are separated in output space") {
  GenConfig cfg = demo_cfg(VariationMode::affine);
  cfg.num_seen_speakers = 2;
  SpeakerDataset ds = generate(cfg);
  auto f1 = ds.select(ds.seen[0], Split::test);
  auto f2 = ds.select(ds.seen[1], Split::test);
  REQUIRE(f1.size() == f2.size());
  double mean_dist = 0.0;
  for (std::size_t i = 0; i < f1.size(); ++i) {
    Vector d = sub(f1[i]->y, f2[i]->y);
    mean_dist += std::sqrt(dot(d, d));
  }
  mean_dist /= double(f1.size());
  CHECK(mean_dist > 0.0);
}

TEST_CASE("oracle rmse floor is the noise level") {
  GenConfig cfg = demo_cfg(VariationMode::affine);
  cfg.noise_sigma = 0.0;
  CHECK(oracle_rmse_floor(cfg) == 0.0);
  cfg.noise_sigma = 0.05;
  CHECK(oracle_rmse_floor(cfg) == 0.05);
}

TEST_CASE("dataset save/load round-trips exactly") {
  GenConfig cfg = demo_cfg(VariationMode::affine, 101);
  SpeakerDataset ds = generate(cfg);
  const std::string dir = scratch_dir("synthgen_roundtrip");
  save_dataset(ds, dir);
  SpeakerDataset back = load_dataset(dir);

  CHECK(back.seen == ds.seen);
  CHECK(back.unseen == ds.unseen);
  CHECK(back.cfg.seed == ds.cfg.seed);
  CHECK(back.cfg.noise_sigma == ds.cfg.noise_sigma);
  REQUIRE(back.frames.size() == ds.frames.size());
  for (std::size_t i = 0; i < ds.frames.size(); ++i) {
    CHECK(back.frames[i].speaker == ds.frames[i].speaker);
    CHECK(back.frames[i].split == ds.frames[i].split);
    CHECK(bits_equal(back.frames[i].x.data(), ds.frames[i].x.data(),
                     ds.frames[i].x.size()));
    CHECK(bits_equal(back.frames[i].y.data(), ds.frames[i].y.data(),
                     ds.frames[i].y.size()));
  }
  for (const auto& [id, lat] : ds.latents) {
    CHECK(linf(back.latents.at(id).alpha, lat.alpha) == 0.0);
    CHECK(linf(back.latents.at(id).beta, lat.beta) == 0.0);
  }
  // Saving the loaded dataset reproduces the original bytes.
  const std::string dir2 = scratch_dir("synthgen_roundtrip2");
  save_dataset(back, dir2);
  CHECK(read_file(dir + "/frames.csv") == read_file(dir2 + "/frames.csv"));
  CHECK(read_file(dir + "/meta.json") == read_file(dir2 + "/meta.json"));
}

TEST_CASE("config validation names the broken field") {
  GenConfig cfg = demo_cfg(VariationMode::affine);
  cfg.train_frames = 0;
  CHECK_THROWS_WITH_AS(generate(cfg), doctest::Contains("train_frames"),
                       ValidationError);
  cfg = demo_cfg(VariationMode::affine);
  cfg.noise_sigma = -0.1;
  CHECK_THROWS_WITH_AS(generate(cfg), doctest::Contains("noise_sigma"),
                       ValidationError);
}

TEST_CASE("base function output is at a useful scale") {
  GenConfig cfg = demo_cfg(VariationMode::affine);
  SpeakerDataset ds = generate(cfg);
  Rng rng(5);
  double sq = 0.0;
  const int trials = 200;
  for (int i = 0; i < trials; ++i) {
    Vector x(std::size_t(cfg.input_dim));
    rng.fill_uniform(x, -1.0, 1.0);
    Vector g = ds.model.eval_base(x);
    sq += dot(g, g) / double(g.size());
  }
  const double rms = std::sqrt(sq / trials);
  CHECK(rms > 0.1);
  CHECK(rms < 3.0);
}
