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

#include "spkcodes/numeric.hpp"

#include <cmath>
#include <string>

namespace spk {

namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

void require_same_len(const Vector& a, const Vector& b, const char* op) {
  if (a.size() != b.size()) {
    throw ValidationError(std::string(op) + ": length mismatch " +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
}

}  // namespace

Vector Vector::basis(std::size_t n, std::size_t i) {
  Vector e(n, 0.0);
  e[i] = 1.0;
  return e;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols != v.size()) {
    throw ValidationError("matvec: matrix " + shape_str(m) +
                          " incompatible with vector of length " +
                          std::to_string(v.size()));
  }
  Vector out(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.data() + i * m.cols;
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) s += row[j] * v[j];
    if (!std::isfinite(s)) {
      throw NumericError("matvec: non-finite entry in output row " +
                         std::to_string(i));
    }
    out[i] = s;
  }
  return out;
}

Vector matvec_t(const Matrix& m, const Vector& v) {
  if (m.rows != v.size()) {
    throw ValidationError("matvec_t: matrix " + shape_str(m) +
                          " incompatible with vector of length " +
                          std::to_string(v.size()));
  }
  Vector out(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.data() + i * m.cols;
    const double vi = v[i];
    for (std::size_t j = 0; j < m.cols; ++j) out[j] += row[j] * vi;
  }
  return out;
}

void add_outer(Matrix& m, const Vector& u, const Vector& v) {
  if (m.rows != u.size() || m.cols != v.size()) {
    throw ValidationError("add_outer: matrix " + shape_str(m) +
                          " incompatible with outer product " +
                          std::to_string(u.size()) + "x" +
                          std::to_string(v.size()));
  }
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* row = m.data() + i * m.cols;
    const double ui = u[i];
    for (std::size_t j = 0; j < m.cols; ++j) row[j] += ui * v[j];
  }
}

Matrix row_scale(const Vector& s, const Matrix& m) {
  if (s.size() != m.rows) {
    throw ValidationError("row_scale: scale length " + std::to_string(s.size()) +
                          " vs matrix " + shape_str(m));
  }
  Matrix out = m;
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* row = out.data() + i * m.cols;
    for (std::size_t j = 0; j < m.cols; ++j) row[j] *= s[i];
  }
  return out;
}

Matrix col_scale(const Matrix& m, const Vector& s) {
  if (s.size() != m.cols) {
    throw ValidationError("col_scale: scale length " + std::to_string(s.size()) +
                          " vs matrix " + shape_str(m));
  }
  Matrix out = m;
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* row = out.data() + i * m.cols;
    for (std::size_t j = 0; j < m.cols; ++j) row[j] *= s[j];
  }
  return out;
}

Vector add(const Vector& a, const Vector& b) {
  require_same_len(a, b, "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector sub(const Vector& a, const Vector& b) {
  require_same_len(a, b, "sub");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector hadamard(const Vector& a, const Vector& b) {
  require_same_len(a, b, "hadamard");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

void add_in_place(Vector& a, const Vector& b) {
  require_same_len(a, b, "add_in_place");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

void scale_in_place(Vector& a, double s) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= s;
}

double dot(const Vector& a, const Vector& b) {
  require_same_len(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_inf(const Vector& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::fabs(x));
  return m;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  require_same_len(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

double sigmoid_scalar(double x) {
  // Branch keeps exp() argument non-positive, and makes sigmoid(-x) and
  // 1 - sigmoid(x) evaluate through the same expression.
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(const Vector& v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = sigmoid_scalar(v[i]);
  return out;
}

std::uint64_t Rng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

std::size_t Rng::next_index(std::size_t n) {
  if (n == 0) throw ValidationError("Rng::next_index: n must be positive");
  return std::size_t(next_u64() % n);
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double two_pi = 6.283185307179586476925286766559;
  spare_ = r * std::sin(two_pi * u2);
  has_spare_ = true;
  return r * std::cos(two_pi * u2);
}

double Rng::gaussian(double mean, double stddev) {
  return mean + stddev * gaussian();
}

void Rng::fill_gaussian(Vector& v, double mean, double stddev) {
  for (auto& x : v) x = gaussian(mean, stddev);
}

void Rng::fill_gaussian(Matrix& m, double mean, double stddev) {
  for (auto& x : m.a) x = gaussian(mean, stddev);
}

void Rng::fill_uniform(Vector& v, double lo, double hi) {
  for (auto& x : v) x = uniform(lo, hi);
}

std::uint64_t Rng::mix(std::uint64_t a, std::uint64_t b) {
  Rng r(a ^ (b * 0xBF58476D1CE4E5B9ULL + 0x9E3779B97F4A7C15ULL));
  r.next_u64();
  return r.next_u64();
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& x, double eps) {
  if (!(eps > 0.0)) throw ValidationError("finite_diff_grad: eps must be > 0");
  Vector g(x.size());
  Vector probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = probe[i];
    probe[i] = xi + eps;
    const double fp = f(probe);
    if (!std::isfinite(fp)) {
      throw NumericError("finite_diff_grad: non-finite f at +eps, coordinate " +
                         std::to_string(i));
    }
    probe[i] = xi - eps;
    const double fm = f(probe);
    if (!std::isfinite(fm)) {
      throw NumericError("finite_diff_grad: non-finite f at -eps, coordinate " +
                         std::to_string(i));
    }
    probe[i] = xi;
    g[i] = (fp - fm) / (2.0 * eps);
  }
  return g;
}

}  // namespace spk
