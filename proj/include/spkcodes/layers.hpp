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
// Layer and adapter math. A dense layer computes f(W h + c). Speaker
// conditioning enters in one of four ways:
//   * LHUC gain: a ∘ f(W h + c), gain applied after the activation.
//   * bias code: f(W h + c + Wb sb), a low-rank speaker bias.
//   * scaling code: f(diag(Wa sa) (W h) + c [+ Wb sb]), a low-rank row
//     scaling of the linear output (applied before the activation).
//   * bottleneck: f(U diag(Wa sa) (V h) + c [+ Wb sb] + h), the weight
//     replaced by a three-factor product with a speaker-scaled core and a
//     residual connection.
// The scaling vector is always kept as a vector; no m x m diagonal matrix
// is ever materialized.

#ifndef SPKCODES_LAYERS_HPP_
#define SPKCODES_LAYERS_HPP_

#include <optional>

#include "spkcodes/numeric.hpp"

namespace spk {

enum class ActivationKind { sigmoid, linear };

Vector activate(ActivationKind k, const Vector& z);
// f'(z) computed from the post-activation value y = f(z).
Vector activation_grad_from_output(ActivationKind k, const Vector& y);

struct DenseLayer {
  Matrix weight;          // m_out x m_in
  Vector bias;            // m_out
  ActivationKind act = ActivationKind::sigmoid;

  std::size_t out_dim() const { return weight.rows; }
  std::size_t in_dim() const { return weight.cols; }
};

// Speaker-dependent affine feature transform x -> A x + b.
struct FmllrTransform {
  Matrix A;  // d x d
  Vector b;  // d
};

// Projects a scaling code (length p) to a per-unit scaling vector.
struct ScalingAdapter {
  Matrix proj;  // m x p
  std::size_t code_dim() const { return proj.cols; }
  std::size_t out_dim() const { return proj.rows; }
};

// Projects a bias code (length q) to a per-unit bias vector.
struct BiasAdapter {
  Matrix proj;  // m x q
  std::size_t code_dim() const { return proj.cols; }
  std::size_t out_dim() const { return proj.rows; }
};

// Weight factorized as out_proj * diag(scaling) * in_proj with a residual
// connection; requires in_dim == out_dim for the residual to type-check.
struct BottleneckLayer {
  Matrix out_proj;        // m x n
  Matrix in_proj;         // n x m_in
  Vector bias;            // m
  ActivationKind act = ActivationKind::sigmoid;

  std::size_t out_dim() const { return out_proj.rows; }
  std::size_t in_dim() const { return in_proj.cols; }
  std::size_t core_dim() const { return out_proj.cols; }
};

// Per-speaker low-dimensional code vectors.
struct SpeakerCode {
  std::optional<Vector> scale_code;  // s_a, length p
  std::optional<Vector> bias_code;   // s_b, length q
};

// Values captured by a forward pass and consumed by the matching backward.
struct LayerCache {
  Vector input;    // h_{l-1}
  Vector lin;      // W h (dense/factored) or V h (bottleneck core input)
  Vector scaling;  // effective scaling vector, empty when none
  Vector core;     // bottleneck only: scaling ∘ (V h)
  Vector preact;   // z
  Vector postact;  // f(z)
  Vector output;   // layer output (differs from postact only for LHUC)
};

// ---- forward ----

Vector fmllr_apply(const FmllrTransform& t, const Vector& x);

std::pair<Vector, LayerCache> dense_forward(const DenseLayer& l, const Vector& h);

// LHUC: gain ∘ f(W h + c).
std::pair<Vector, LayerCache> lhuc_forward(const DenseLayer& l, const Vector& gain,
                                           const Vector& h);

// Absorbs a post-activation gain into the next layer: W_next * diag(gain).
Matrix fold_lhuc(const Matrix& next_weight, const Vector& gain);

// diag vector Wa * sa, kept as a length-m vector.
Vector scaling_from_code(const ScalingAdapter& ad, const Vector& scale_code);

// bias vector Wb * sb.
Vector bias_from_code(const BiasAdapter& ad, const Vector& bias_code);

// f(scaling ∘ (W h) + c + bias_from_code), either adapter optional. A missing
// scaling adapter behaves as all-ones scaling, a missing bias adapter as a
// zero bias. The code must provide a component for each present adapter.
std::pair<Vector, LayerCache> factored_forward(const DenseLayer& l,
                                               const ScalingAdapter* scale_ad,
                                               const BiasAdapter* bias_ad,
                                               const SpeakerCode& code,
                                               const Vector& h);

// f(U (scaling ∘ (V h)) + c + bias + h) with the residual term h.
std::pair<Vector, LayerCache> bottleneck_forward(const BottleneckLayer& l,
                                                 const ScalingAdapter& scale_ad,
                                                 const BiasAdapter* bias_ad,
                                                 const SpeakerCode& code,
                                                 const Vector& h);

// ---- backward ----
// Each backward consumes the cache of the matching forward call and the
// gradient w.r.t. the layer output, and returns gradients for every
// parameter, the code components, and the input.

struct DenseGrads {
  Matrix d_weight;
  Vector d_bias;
  Vector d_input;
};

struct LhucGrads {
  Matrix d_weight;
  Vector d_bias;
  Vector d_gain;
  Vector d_input;
};

struct FactoredGrads {
  Matrix d_weight;
  Vector d_bias;
  Matrix d_scale_proj;  // empty when no scaling adapter
  Vector d_scale_code;
  Matrix d_bias_proj;   // empty when no bias adapter
  Vector d_bias_code;
  Vector d_input;
};

struct BottleneckGrads {
  Matrix d_out_proj;
  Matrix d_in_proj;
  Vector d_bias;
  Matrix d_scale_proj;
  Vector d_scale_code;
  Matrix d_bias_proj;  // empty when no bias adapter
  Vector d_bias_code;
  Vector d_input;
};

struct FmllrGrads {
  Matrix d_A;
  Vector d_b;
  Vector d_input;
};

DenseGrads dense_backward(const DenseLayer& l, const LayerCache& cache,
                          const Vector& upstream);

LhucGrads lhuc_backward(const DenseLayer& l, const Vector& gain,
                        const LayerCache& cache, const Vector& upstream);

FactoredGrads factored_backward(const DenseLayer& l,
                                const ScalingAdapter* scale_ad,
                                const BiasAdapter* bias_ad,
                                const SpeakerCode& code, const LayerCache& cache,
                                const Vector& upstream);

BottleneckGrads bottleneck_backward(const BottleneckLayer& l,
                                    const ScalingAdapter& scale_ad,
                                    const BiasAdapter* bias_ad,
                                    const SpeakerCode& code,
                                    const LayerCache& cache,
                                    const Vector& upstream);

FmllrGrads fmllr_backward(const FmllrTransform& t, const Vector& x,
                          const Vector& upstream);

}  // namespace spk

#endif  // SPKCODES_LAYERS_HPP_
