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
// Loss, optimizer and the two optimization entry points: joint multi-speaker
// training (shared parameters, adapter projections and every seen speaker's
// codes together) and adaptation of a single new speaker against a frozen
// shared network.

#ifndef SPKCODES_TRAINING_HPP_
#define SPKCODES_TRAINING_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spkcodes/model.hpp"
#include "spkcodes/synthgen.hpp"

namespace spk {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int patience = 20;  // early-stop patience on validation loss
  std::uint64_t seed = 0;
  bool shuffle = true;
};

enum class TrainableSet { codes_only, codes_and_layer_k, full_finetune_layers };

std::string trainable_set_name(TrainableSet s);
TrainableSet trainable_set_from_name(const std::string& name);

struct AdaptConfig {
  TrainConfig base;
  TrainableSet trainable = TrainableSet::codes_only;
  int layer_k = -1;  // adapter layer for codes_and_layer_k; -1 = first injected
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> valid_loss;
  std::vector<double> seconds;  // wall time per epoch, excluded from reports
  int best_epoch = -1;
  double best_valid = 0.0;
  int epochs_run() const { return int(train_loss.size()); }
};

// CSV export: epoch, train_loss, valid_loss, seconds.
std::string history_csv(const TrainHistory& h);

double mse_loss(const Vector& pred, const Vector& target);
Vector mse_loss_grad(const Vector& pred, const Vector& target);

// Which parameters an optimization run updates.
struct TrainScope {
  bool shared = true;
  bool adapters = true;
  std::optional<int> adapter_layer_only;  // restrict adapters to one layer
  std::vector<std::string> speakers;      // whose codes/gains/copies update
};

// Per-speaker gradient storage mirroring SpeakerState.
struct SpeakerGrads {
  Vector d_scale_code;
  Vector d_bias_code;
  std::map<int, Vector> d_lhuc;
  std::map<int, std::pair<Matrix, Vector>> d_tuned;  // layer -> (dW, dc)
};

// Minibatch gradient accumulator mirroring one network's parameter layout.
struct GradAccumulator {
  std::vector<LayerParamGrads> layers;
  std::map<std::string, SpeakerGrads> speakers;

  void init(Network& net, const std::vector<std::string>& speaker_ids);
  void zero();
  void add_frame(const FrameGrads& fg, const std::string& speaker);
  void scale(double s);
};

// One trainable tensor: parameter storage plus its accumulated gradient.
struct ParamGradPair {
  std::string name;
  ParamGroup group;
  double* param = nullptr;
  double* grad = nullptr;
  std::size_t size = 0;
};

// Enumerates (parameter, gradient) pairs for a scope in a canonical order:
// per-layer core tensors, then adapters, then each scoped speaker's tensors
// sorted by id. The accumulator must have been init'ed over the same network
// and a superset of the scoped speakers.
std::vector<ParamGradPair> collect_trainable(Network& net, GradAccumulator& acc,
                                             const TrainScope& scope);

// Adaptive-moments gradient descent (decay pair beta1/beta2, bias-corrected).
class Adam {
 public:
  Adam(const std::vector<ParamGradPair>& pairs, const TrainConfig& cfg);
  void step(const std::vector<ParamGradPair>& pairs);

 private:
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

// Copies every parameter value of src into dst. Both networks must have the
// same structure and speaker set. Pointer identity in dst is preserved.
void copy_params(Network& dst, Network& src);

// Mean squared-error loss of one frame under the current parameters.
double frame_loss(const Network& net, const Frame& frame,
                  const std::string& speaker);

// RMSE over a set of frames: sqrt(sum of squared errors / (frames * dims)).
double frames_rmse(const Network& net, const std::vector<const Frame*>& frames,
                   const std::string* speaker_override = nullptr);

// Joint optimization of shared parameters, adapter projections, and all seen
// speakers' codes. Early-stops on validation loss and restores the best
// checkpoint. Deterministic given (network, data, cfg.seed).
TrainHistory train_multispeaker(Network& net, const SpeakerDataset& data,
                                const TrainConfig& cfg);

// Registers `id`, then optimizes only the selected trainable set on the given
// adaptation frames. Shared parameters and other speakers' codes are not
// touched. Returns the new speaker's state after adaptation.
SpeakerState adapt_speaker(Network& net, const std::string& id,
                           const std::vector<const Frame*>& adapt_frames,
                           const std::vector<const Frame*>& valid_frames,
                           const AdaptConfig& cfg);

// ---- gradient checking ----

struct GradcheckGroup {
  double max_rel = 0.0;
  std::string worst_tensor;
};

struct GradcheckReport {
  GradcheckGroup shared;
  GradcheckGroup adapters;
  GradcheckGroup codes;  // all speaker-owned parameters
  double overall() const;
  bool ok(double tol = 1e-5) const { return overall() < tol; }
};

// Analytic gradients of the frame loss for every parameter reachable from
// this frame (shared + adapters + the frame speaker's parameters).
GradAccumulator analytic_frame_grads(Network& net, const Frame& frame,
                                     const std::string& speaker);

// Compares claimed analytic gradients against central finite differences.
// Relative error uses max(|ga|, |gn|, floor) as denominator so that the
// finite-difference noise floor does not dominate near-zero entries.
GradcheckReport compare_to_finite_diff(Network& net, const Frame& frame,
                                       const std::string& speaker,
                                       const std::vector<ParamGradPair>& pairs,
                                       double eps, double floor = 1e-3);

GradcheckReport gradcheck(Network& net, const Frame& frame, double eps = 1e-6,
                          double floor = 1e-3);

}  // namespace spk

#endif  // SPKCODES_TRAINING_HPP_
