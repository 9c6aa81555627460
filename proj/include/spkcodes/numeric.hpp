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

#ifndef SPKCODES_NUMERIC_HPP_
#define SPKCODES_NUMERIC_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

#include "spkcodes/util.hpp"

namespace spk {

// Dense double-precision vector. Row containers are deliberately plain:
// deterministic naive loops beat BLAS variability at the sizes used here.
struct Vector {
  std::vector<double> v;

  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : v(n, fill) {}
  Vector(std::initializer_list<double> xs) : v(xs) {}

  std::size_t size() const { return v.size(); }
  bool empty() const { return v.empty(); }
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  auto begin() { return v.begin(); }
  auto end() { return v.end(); }
  auto begin() const { return v.begin(); }
  auto end() const { return v.end(); }
  bool operator==(const Vector& o) const { return v == o.v; }

  static Vector ones(std::size_t n) { return Vector(n, 1.0); }
  // i-th standard basis vector of length n.
  static Vector basis(std::size_t n, std::size_t i);
};

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), a(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
  std::size_t size() const { return a.size(); }
  double* data() { return a.data(); }
  const double* data() const { return a.data(); }
  bool operator==(const Matrix& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
  }

  static Matrix identity(std::size_t n);
};

// m * v. Throws ValidationError naming both shapes on mismatch.
Vector matvec(const Matrix& m, const Vector& v);
// m^T * v.
Vector matvec_t(const Matrix& m, const Vector& v);
// m += u * v^T.
void add_outer(Matrix& m, const Vector& u, const Vector& v);
// diag(s) * m (scales row i by s[i]).
Matrix row_scale(const Vector& s, const Matrix& m);
// m * diag(s) (scales column j by s[j]).
Matrix col_scale(const Matrix& m, const Vector& s);

Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector hadamard(const Vector& a, const Vector& b);
void add_in_place(Vector& a, const Vector& b);
void scale_in_place(Vector& a, double s);
double dot(const Vector& a, const Vector& b);
double norm_inf(const Vector& a);
double max_abs_diff(const Vector& a, const Vector& b);

// Elementwise logistic function, numerically stable for large |x| and
// exactly symmetric: sigmoid(-x) == 1 - sigmoid(x).
double sigmoid_scalar(double x);
Vector sigmoid(const Vector& v);

// Deterministic counter-based generator (splitmix64). Identical seeds give
// identical sequences on every platform. Update rule:
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   output = z ^ (z >> 31)
// uniform() maps the top 53 bits to [0,1). gaussian() is Box-Muller on the
// uniform stream (u1 = 1 - uniform() in (0,1], u2 = uniform()); the pair's
// second value is cached and returned by the next call.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  std::size_t next_index(std::size_t n);  // next_u64() % n, n > 0
  double gaussian();
  double gaussian(double mean, double stddev);
  void fill_gaussian(Vector& v, double mean, double stddev);
  void fill_gaussian(Matrix& m, double mean, double stddev);
  void fill_uniform(Vector& v, double lo, double hi);

  // Derives an independent stream seed from two values; used to key
  // per-tensor and per-speaker initialization streams.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Central finite differences: g[i] = (f(x + eps e_i) - f(x - eps e_i)) / 2eps.
// Throws NumericError identifying the perturbed coordinate if f returns a
// non-finite value.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& x, double eps = 1e-6);

}  // namespace spk

#endif  // SPKCODES_NUMERIC_HPP_
