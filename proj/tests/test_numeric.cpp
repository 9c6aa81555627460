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
#include "spkcodes/numeric.hpp"
#include "test_common.hpp"

using namespace spk;
using namespace spk::testing;

TEST_CASE("matvec identity and annihilator") {
  Matrix id = Matrix::identity(2);
  Vector v{0.3, -0.7};
  Vector out = matvec(id, v);
  CHECK(out[0] == 0.3);
  CHECK(out[1] == -0.7);

  Matrix zero(3, 2, 0.0);
  Vector z = matvec(zero, v);
  CHECK(z.size() == 3);
  for (double x : z) CHECK(x == 0.0);
}

TEST_CASE("matvec hand-computed product") {
  Matrix m(2, 2);
  m.at(0, 0) = 1;
  m.at(0, 1) = 2;
  m.at(1, 0) = 0;
  m.at(1, 1) = 1;
  Vector out = matvec(m, Vector{1, 1});
  CHECK(out[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("matvec dimension mismatch names both shapes") {
  Matrix m(3, 2);
  Vector v(4);
  try {
    matvec(m, v);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    CHECK(msg.find("3x2") != std::string::npos);
    CHECK(msg.find("4") != std::string::npos);
  }
}

TEST_CASE("matvec with identity is exact for random vectors") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.next_index(32);
    Matrix id = Matrix::identity(n);
    Vector v = random_vector(rng, n, 2.0);
    Vector out = matvec(id, v);
    CHECK(bits_equal(out.data(), v.data(), n));
  }
}

TEST_CASE("matvec linearity within 1e-12 relative") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m = random_matrix(rng, 5, 4);
    Vector u = random_vector(rng, 4);
    Vector v = random_vector(rng, 4);
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    Vector lhs_arg(4);
    for (std::size_t i = 0; i < 4; ++i) lhs_arg[i] = a * u[i] + b * v[i];
    Vector lhs = matvec(m, lhs_arg);
    Vector mu = matvec(m, u), mv = matvec(m, v);
    for (std::size_t i = 0; i < 5; ++i) {
      const double want = a * mu[i] + b * mv[i];
      CHECK(std::fabs(lhs[i] - want) <=
            1e-12 * std::max(1.0, std::fabs(want)));
    }
  }
}

TEST_CASE("sigmoid fixed points") {
  Vector out = sigmoid(Vector{0.0, 0.0});
  CHECK(out[0] == 0.5);
  CHECK(out[1] == 0.5);

  Vector sat = sigmoid(Vector{1000.0});
  CHECK(std::fabs(sat[0] - 1.0) <= 1e-12);

  Vector ln3 = sigmoid(Vector{std::log(3.0)});
  CHECK(ln3[0] == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("sigmoid stays strictly inside (0,1) and is symmetric") {
  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-30.0, 30.0);
    const double s = sigmoid_scalar(x);
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    CHECK(std::fabs(sigmoid_scalar(-x) - (1.0 - s)) <= 1e-15);
  }
}

TEST_CASE("finite differences of a dot-square") {
  auto f = [](const Vector& x) { return dot(x, x); };
  Vector g = finite_diff_grad(f, Vector{1.0, 2.0}, 1e-6);
  CHECK(std::fabs(g[0] - 2.0) <= 1e-6);
  CHECK(std::fabs(g[1] - 4.0) <= 1e-6);
}

TEST_CASE("finite differences of constant and linear functions") {
  auto constant = [](const Vector&) { return 3.5; };
  Vector g0 = finite_diff_grad(constant, Vector{0.2, -0.4, 1.0}, 1e-6);
  for (double x : g0) CHECK(x == 0.0);

  auto total = [](const Vector& x) {
    double s = 0;
    for (double v : x) s += v;
    return s;
  };
  Rng rng(14);
  Vector x = random_vector(rng, 6);
  Vector g1 = finite_diff_grad(total, x, 1e-6);
  for (double v : g1) CHECK(std::fabs(v - 1.0) <= 1e-9);
}

TEST_CASE("finite differences flag the non-finite coordinate") {
  auto f = [](const Vector& x) { return std::log(x[1]); };
  try {
    finite_diff_grad(f, Vector{1.0, 1e-7}, 1e-6);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("coordinate 1") != std::string::npos);
  }
}

TEST_CASE("finite differences match the quadratic-form gradient") {
  Rng rng(15);
  Matrix a = random_matrix(rng, 4, 4);
  auto f = [&](const Vector& x) { return dot(x, matvec(a, x)); };
  Vector x = random_vector(rng, 4);
  Vector g = finite_diff_grad(f, x, 1e-6);
  // d/dx xᵀAx = (A + Aᵀ) x
  Vector want = add(matvec(a, x), matvec_t(a, x));
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::fabs(g[i] - want[i]) <= 1e-5 * std::max(1.0, std::fabs(want[i])));
  }
}

TEST_CASE("equal seeds give identical draw sequences") {
  Rng a(0xDEADBEEF), b(0xDEADBEEF);
  for (int i = 0; i < 1000000; ++i) {
    if (a.next_u64() != b.next_u64()) {
      FAIL("sequences diverged at draw ", i);
    }
  }
  Rng c(1), d(2);
  CHECK(c.next_u64() != d.next_u64());
}

TEST_CASE("gaussian stream is deterministic and roughly standard") {
  Rng a(77), b(77);
  double sum = 0, sumsq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = a.gaussian();
    CHECK(x == b.gaussian());
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.05);
  CHECK(std::fabs(var - 1.0) < 0.05);
}

TEST_CASE("uniform draws stay in range") {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}
