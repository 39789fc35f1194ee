/*
 * Copyright 2026 The rrl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "rrl/linalg.hpp"
#include "rrl/oracle.hpp"

using namespace rrl;

TEST(Linalg, MatmulVariantsAgree) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Matrix a(5, 7, std::vector<double>(35)), b(7, 4, std::vector<double>(28));
  for (double& v : a.flat()) v = g(rng);
  for (double& v : b.flat()) v = g(rng);
  const Matrix ab = matmul(a, b);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 7; ++k) s += a(i, k) * b(k, j);
      EXPECT_NEAR(ab(i, j), s, 1e-12);
    }
  EXPECT_LT(relative_error(matmul_tn(a.transpose(), b), ab), 1e-14);
  EXPECT_LT(relative_error(matmul_nt(a, b.transpose()), ab), 1e-14);

  Matrix c(5, 4, std::vector<double>(20, 1.0));
  gemm_tn_acc(a.transpose(), b, c, 2.0);
  EXPECT_NEAR(c(2, 3), 1.0 + 2.0 * ab(2, 3), 1e-12);
}

TEST(Linalg, MatvecAndTranspose) {
  const Matrix a{{1, 2, 3}, {4, 5, 6}};
  const Vector y = matvec(a, Vector{1, 0, -1});
  EXPECT_DOUBLE_EQ(y[0], -2);
  EXPECT_DOUBLE_EQ(y[1], -2);
  const Vector z = matvec_t(a, Vector{1, 1});
  EXPECT_DOUBLE_EQ(z[2], 9);
  EXPECT_THROW(matvec(a, Vector{1, 2}), DimensionError);
}

TEST(Linalg, Norms) {
  const Vector v{3, -4, 0};
  EXPECT_DOUBLE_EQ(norm(v, Norm::l1), 7);
  EXPECT_DOUBLE_EQ(norm(v, Norm::l2), 5);
  EXPECT_DOUBLE_EQ(norm(v, Norm::linf), 4);
  EXPECT_DOUBLE_EQ(frobenius(Matrix{{1, 1}, {1, 1}}), 2);
  EXPECT_FALSE(all_finite(Vector{1, NAN}.span()));
}

TEST(Linalg, PowerIterationMatchesJacobi) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + trial;
    Matrix b(n, n, std::vector<double>(n * n));
    for (double& v : b.flat()) v = std::normal_distribution<double>()(rng);
    const Matrix s = matmul_tn(b, b);  // PSD
    const EigenPair top = top_eigpair_sym(s, 1e-13, 100000);
    const SymmetricSpectrum spec = dense_eig_sym(s);
    EXPECT_LT(relative_error(top.value, spec.values.front()), 1e-9) << "n=" << n;
  }
}

TEST(Linalg, PowerIterationOnOperator) {
  SymmetricOperator op{2, [](const Vector& x) { return Vector{2 * x[0], -5 * x[1]}; }};
  const EigenPair e = top_eigpair_sym(op, 1e-12, 10000);
  EXPECT_NEAR(std::abs(e.value), 5.0, 1e-9);
  EXPECT_NEAR(std::abs(e.vector[1]), 1.0, 1e-6);
}

TEST(Linalg, OuterAndAsymmetry) {
  const Matrix o = outer(Vector{1, 2}, Vector{3, 4});
  EXPECT_DOUBLE_EQ(o(1, 0), 6);
  EXPECT_GT(asymmetry(o), 0.0);
  EXPECT_DOUBLE_EQ(asymmetry(matmul_nt(o, o)), 0.0);
}
