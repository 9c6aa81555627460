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
// Deterministic synthetic multi-speaker regression data. Every speaker's
// targets come from a shared base function g (a frozen random two-hidden-layer
// tanh network) deformed by per-speaker latents:
//   y = alpha ∘ g(x) + beta + noise,  x ~ U[-1,1]^d
// with alpha log-normal (multiplicative) and beta gaussian (additive). The
// variation mode masks one of the two, which makes scaling-code and bias-code
// strategies distinguishable by construction.

#ifndef SPKCODES_SYNTHGEN_HPP_
#define SPKCODES_SYNTHGEN_HPP_

#include <map>
#include <string>
#include <vector>

#include "spkcodes/numeric.hpp"

namespace spk {

enum class VariationMode { scale, bias, affine };

std::string variation_mode_name(VariationMode m);
VariationMode variation_mode_from_name(const std::string& s);

enum class Split { train, valid, test };

std::string split_name(Split s);
Split split_from_name(const std::string& s);

struct GenConfig {
  int num_seen_speakers = 16;
  int num_unseen_speakers = 4;
  int train_frames = 200;   // per seen speaker
  int valid_frames = 40;    // per speaker
  int test_frames = 40;     // per speaker
  int adapt_frames = 160;   // 'train' split size for unseen speakers
  int input_dim = 8;
  int output_dim = 6;
  VariationMode mode = VariationMode::affine;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;
};

struct SpeakerLatent {
  Vector alpha;  // multiplicative factor, all-ones in bias mode
  Vector beta;   // additive factor, zero in scale mode
};

struct Frame {
  std::string speaker;
  Split split = Split::train;
  Vector x;
  Vector y;
};

// The frozen base function g.
struct SynthModel {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
  Matrix w3;
  Vector b3;

  Vector eval_base(const Vector& x) const;  // g(x)
  // Noise-free target for one speaker: alpha ∘ g(x) + beta.
  Vector eval_speaker(const SpeakerLatent& lat, const Vector& x) const;
};

struct SpeakerDataset {
  GenConfig cfg;
  SynthModel model;
  std::vector<std::string> seen;
  std::vector<std::string> unseen;
  std::map<std::string, SpeakerLatent> latents;
  std::vector<Frame> frames;

  bool is_seen(const std::string& id) const;
  std::vector<const Frame*> select(const std::string& speaker, Split s) const;
  std::vector<const Frame*> select_seen(Split s) const;
};

SpeakerDataset generate(const GenConfig& cfg);

// RMSE of the Bayes-optimal predictor that knows g and all latents.
double oracle_rmse_floor(const GenConfig& cfg);

// On-disk form: meta.json (config echo, latents, partition, base function)
// plus frames.csv (speaker, split, x..., y...), doubles at 17 significant
// digits. Generation is byte-deterministic for equal configs.
std::string dataset_meta_json(const SpeakerDataset& ds);
std::string dataset_frames_csv(const SpeakerDataset& ds);
void save_dataset(const SpeakerDataset& ds, const std::string& dir);
SpeakerDataset load_dataset(const std::string& dir);

// Content hash over the exact bytes save_dataset writes.
std::string dataset_hash(const SpeakerDataset& ds);

}  // namespace spk

#endif  // SPKCODES_SYNTHGEN_HPP_
