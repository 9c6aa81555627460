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

#include "spkcodes/layers.hpp"

#include <string>

namespace spk {

namespace {

void require_len(const Vector& v, std::size_t want, const char* what) {
  if (v.size() != want) {
    throw ValidationError(std::string(what) + ": expected length " +
                          std::to_string(want) + ", got " +
                          std::to_string(v.size()));
  }
}

const Vector& need_scale_code(const SpeakerCode& code) {
  if (!code.scale_code) {
    throw ValidationError(
        "speaker code is missing the scale component required by a scaling "
        "adapter");
  }
  return *code.scale_code;
}

const Vector& need_bias_code(const SpeakerCode& code) {
  if (!code.bias_code) {
    throw ValidationError(
        "speaker code is missing the bias component required by a bias "
        "adapter");
  }
  return *code.bias_code;
}

}  // namespace

Vector activate(ActivationKind k, const Vector& z) {
  switch (k) {
    case ActivationKind::sigmoid:
      return sigmoid(z);
    case ActivationKind::linear:
      return z;
  }
  throw ValidationError("unknown activation kind");
}

Vector activation_grad_from_output(ActivationKind k, const Vector& y) {
  Vector g(y.size());
  switch (k) {
    case ActivationKind::sigmoid:
      for (std::size_t i = 0; i < y.size(); ++i) g[i] = y[i] * (1.0 - y[i]);
      return g;
    case ActivationKind::linear:
      for (std::size_t i = 0; i < y.size(); ++i) g[i] = 1.0;
      return g;
  }
  throw ValidationError("unknown activation kind");
}

Vector fmllr_apply(const FmllrTransform& t, const Vector& x) {
  if (t.A.rows != t.A.cols) {
    throw ValidationError("fmllr_apply: A must be square, got " +
                          std::to_string(t.A.rows) + "x" +
                          std::to_string(t.A.cols));
  }
  require_len(t.b, t.A.rows, "fmllr_apply: b");
  Vector out = matvec(t.A, x);
  add_in_place(out, t.b);
  return out;
}

std::pair<Vector, LayerCache> dense_forward(const DenseLayer& l, const Vector& h) {
  LayerCache cache;
  cache.input = h;
  cache.lin = matvec(l.weight, h);
  require_len(l.bias, l.weight.rows, "dense_forward: bias");
  cache.preact = add(cache.lin, l.bias);
  cache.postact = activate(l.act, cache.preact);
  cache.output = cache.postact;
  return {cache.output, cache};
}

std::pair<Vector, LayerCache> lhuc_forward(const DenseLayer& l, const Vector& gain,
                                           const Vector& h) {
  require_len(gain, l.weight.rows, "lhuc_forward: gain");
  auto [y, cache] = dense_forward(l, h);
  cache.scaling = gain;
  cache.output = hadamard(gain, y);
  return {cache.output, cache};
}

Matrix fold_lhuc(const Matrix& next_weight, const Vector& gain) {
  return col_scale(next_weight, gain);
}

Vector scaling_from_code(const ScalingAdapter& ad, const Vector& scale_code) {
  return matvec(ad.proj, scale_code);
}

Vector bias_from_code(const BiasAdapter& ad, const Vector& bias_code) {
  return matvec(ad.proj, bias_code);
}

std::pair<Vector, LayerCache> factored_forward(const DenseLayer& l,
                                               const ScalingAdapter* scale_ad,
                                               const BiasAdapter* bias_ad,
                                               const SpeakerCode& code,
                                               const Vector& h) {
  LayerCache cache;
  cache.input = h;
  cache.lin = matvec(l.weight, h);
  require_len(l.bias, l.weight.rows, "factored_forward: bias");

  Vector z;
  if (scale_ad != nullptr) {
    const Vector& sa = need_scale_code(code);
    cache.scaling = scaling_from_code(*scale_ad, sa);
    require_len(cache.scaling, l.weight.rows, "factored_forward: scaling");
    z = hadamard(cache.scaling, cache.lin);
  } else {
    z = cache.lin;
  }
  add_in_place(z, l.bias);
  if (bias_ad != nullptr) {
    const Vector& sb = need_bias_code(code);
    Vector b = bias_from_code(*bias_ad, sb);
    require_len(b, l.weight.rows, "factored_forward: bias projection");
    add_in_place(z, b);
  }
  cache.preact = z;
  cache.postact = activate(l.act, cache.preact);
  cache.output = cache.postact;
  return {cache.output, cache};
}

std::pair<Vector, LayerCache> bottleneck_forward(const BottleneckLayer& l,
                                                 const ScalingAdapter& scale_ad,
                                                 const BiasAdapter* bias_ad,
                                                 const SpeakerCode& code,
                                                 const Vector& h) {
  if (l.in_dim() != l.out_dim()) {
    throw ValidationError(
        "bottleneck_forward: residual requires in_dim == out_dim, got " +
        std::to_string(l.in_dim()) + " vs " + std::to_string(l.out_dim()));
  }
  if (scale_ad.out_dim() != l.core_dim()) {
    throw ValidationError(
        "bottleneck_forward: scaling adapter rows " +
        std::to_string(scale_ad.out_dim()) + " must equal bottleneck width " +
        std::to_string(l.core_dim()));
  }
  LayerCache cache;
  cache.input = h;
  cache.lin = matvec(l.in_proj, h);  // V h, length n
  cache.scaling = scaling_from_code(scale_ad, need_scale_code(code));
  cache.core = hadamard(cache.scaling, cache.lin);
  Vector z = matvec(l.out_proj, cache.core);
  require_len(l.bias, l.out_dim(), "bottleneck_forward: bias");
  add_in_place(z, l.bias);
  if (bias_ad != nullptr) {
    Vector b = bias_from_code(*bias_ad, need_bias_code(code));
    require_len(b, l.out_dim(), "bottleneck_forward: bias projection");
    add_in_place(z, b);
  }
  add_in_place(z, h);  // residual
  cache.preact = z;
  cache.postact = activate(l.act, cache.preact);
  cache.output = cache.postact;
  return {cache.output, cache};
}

DenseGrads dense_backward(const DenseLayer& l, const LayerCache& cache,
                          const Vector& upstream) {
  require_len(upstream, l.out_dim(), "dense_backward: upstream");
  DenseGrads g;
  Vector dz = hadamard(upstream, activation_grad_from_output(l.act, cache.postact));
  g.d_weight = Matrix(l.weight.rows, l.weight.cols, 0.0);
  add_outer(g.d_weight, dz, cache.input);
  g.d_bias = dz;
  g.d_input = matvec_t(l.weight, dz);
  return g;
}

LhucGrads lhuc_backward(const DenseLayer& l, const Vector& gain,
                        const LayerCache& cache, const Vector& upstream) {
  require_len(upstream, l.out_dim(), "lhuc_backward: upstream");
  require_len(gain, l.out_dim(), "lhuc_backward: gain");
  LhucGrads g;
  g.d_gain = hadamard(upstream, cache.postact);
  Vector d_post = hadamard(upstream, gain);
  Vector dz = hadamard(d_post, activation_grad_from_output(l.act, cache.postact));
  g.d_weight = Matrix(l.weight.rows, l.weight.cols, 0.0);
  add_outer(g.d_weight, dz, cache.input);
  g.d_bias = dz;
  g.d_input = matvec_t(l.weight, dz);
  return g;
}

FactoredGrads factored_backward(const DenseLayer& l,
                                const ScalingAdapter* scale_ad,
                                const BiasAdapter* bias_ad,
                                const SpeakerCode& code, const LayerCache& cache,
                                const Vector& upstream) {
  require_len(upstream, l.out_dim(), "factored_backward: upstream");
  FactoredGrads g;
  Vector dz = hadamard(upstream, activation_grad_from_output(l.act, cache.postact));
  g.d_bias = dz;
  if (bias_ad != nullptr) {
    const Vector& sb = need_bias_code(code);
    g.d_bias_proj = Matrix(bias_ad->proj.rows, bias_ad->proj.cols, 0.0);
    add_outer(g.d_bias_proj, dz, sb);
    g.d_bias_code = matvec_t(bias_ad->proj, dz);
  }
  Vector dt;  // gradient w.r.t. the linear output W h
  if (scale_ad != nullptr) {
    const Vector& sa = need_scale_code(code);
    Vector d_scaling = hadamard(dz, cache.lin);
    g.d_scale_proj = Matrix(scale_ad->proj.rows, scale_ad->proj.cols, 0.0);
    add_outer(g.d_scale_proj, d_scaling, sa);
    g.d_scale_code = matvec_t(scale_ad->proj, d_scaling);
    dt = hadamard(dz, cache.scaling);
  } else {
    dt = dz;
  }
  g.d_weight = Matrix(l.weight.rows, l.weight.cols, 0.0);
  add_outer(g.d_weight, dt, cache.input);
  g.d_input = matvec_t(l.weight, dt);
  return g;
}

BottleneckGrads bottleneck_backward(const BottleneckLayer& l,
                                    const ScalingAdapter& scale_ad,
                                    const BiasAdapter* bias_ad,
                                    const SpeakerCode& code,
                                    const LayerCache& cache,
                                    const Vector& upstream) {
  require_len(upstream, l.out_dim(), "bottleneck_backward: upstream");
  BottleneckGrads g;
  Vector dz = hadamard(upstream, activation_grad_from_output(l.act, cache.postact));
  g.d_bias = dz;
  if (bias_ad != nullptr) {
    const Vector& sb = need_bias_code(code);
    g.d_bias_proj = Matrix(bias_ad->proj.rows, bias_ad->proj.cols, 0.0);
    add_outer(g.d_bias_proj, dz, sb);
    g.d_bias_code = matvec_t(bias_ad->proj, dz);
  }
  g.d_out_proj = Matrix(l.out_proj.rows, l.out_proj.cols, 0.0);
  add_outer(g.d_out_proj, dz, cache.core);
  Vector d_core = matvec_t(l.out_proj, dz);

  const Vector& sa = need_scale_code(code);
  Vector d_scaling = hadamard(d_core, cache.lin);
  g.d_scale_proj = Matrix(scale_ad.proj.rows, scale_ad.proj.cols, 0.0);
  add_outer(g.d_scale_proj, d_scaling, sa);
  g.d_scale_code = matvec_t(scale_ad.proj, d_scaling);

  Vector d_lin = hadamard(d_core, cache.scaling);
  g.d_in_proj = Matrix(l.in_proj.rows, l.in_proj.cols, 0.0);
  add_outer(g.d_in_proj, d_lin, cache.input);
  g.d_input = matvec_t(l.in_proj, d_lin);
  add_in_place(g.d_input, dz);  // residual path
  return g;
}

FmllrGrads fmllr_backward(const FmllrTransform& t, const Vector& x,
                          const Vector& upstream) {
  require_len(upstream, t.A.rows, "fmllr_backward: upstream");
  FmllrGrads g;
  g.d_A = Matrix(t.A.rows, t.A.cols, 0.0);
  add_outer(g.d_A, upstream, x);
  g.d_b = upstream;
  g.d_input = matvec_t(t.A, upstream);
  return g;
}

}  // namespace spk
