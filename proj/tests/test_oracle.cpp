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
#include "rrl/oracle.hpp"

using namespace rrl;

TEST(Oracle, RelativeErrorUsesAFloor) {
  EXPECT_DOUBLE_EQ(relative_error(1.0, 1.0), 0.0);
  EXPECT_NEAR(relative_error(1.1, 1.0), 0.1, 1e-15);
  EXPECT_NEAR(relative_error(1e-20, 0.0), 1e-20 / 1e-12, 1e-15);
  const OracleReport r = make_report("x", 1.0, 1.0 + 1e-9, 1e-8);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(make_report("x", 1.0, 1.1, 1e-8).pass);
  EXPECT_FALSE(make_report("x", NAN, 1.0, 1e-8).pass);
}

TEST(Oracle, FiniteDifferencesOnAQuadratic) {
  // f(x) = x0^2 + 3 x0 x1 - x1^3 / 3
  const ScalarField f = [](const Vector& x) {
    return x[0] * x[0] + 3 * x[0] * x[1] - x[1] * x[1] * x[1] / 3;
  };
  const Vector x{0.4, -1.2};
  const Vector g = fd_gradient(f, x);
  EXPECT_NEAR(g[0], 2 * 0.4 + 3 * -1.2, 1e-8);
  EXPECT_NEAR(g[1], 3 * 0.4 - 1.44, 1e-7);
  const Matrix h = fd_hessian(f, x);
  EXPECT_NEAR(h(0, 0), 2.0, 1e-6);
  EXPECT_NEAR(h(0, 1), 3.0, 1e-6);
  EXPECT_NEAR(h(1, 0), 3.0, 1e-6);
  EXPECT_NEAR(h(1, 1), 2.4, 1e-5);
}

TEST(Oracle, ReferenceHessianByFiniteDifferences) {
  const Network net = rrl::testing::reference_net();
  const ScalarField f = [&](const Vector& x) { return ce_loss_naive(logits(net, x), 0); };
  const Matrix h = fd_hessian(f, rrl::testing::reference_x());
  // s w w^T with w = (2, 0) and s = p (1 - p).
  EXPECT_NEAR(h(0, 0) / 4, 0.196612, 1e-6);
  EXPECT_NEAR(h(1, 1), 0.0, 1e-9);
}

TEST(Oracle, NaiveLossMatchesLogSumExp) {
  EXPECT_NEAR(ce_loss_naive(Vector{0.5, -0.5}, 0), rrl::testing::kRefLoss, 1e-15);
  EXPECT_NEAR(ce_loss_naive(Vector{0.0, 0.0, 0.0}, 2), std::log(3.0), 1e-15);
}

TEST(Oracle, JacobiEigenvalues) {
  const SymmetricSpectrum s = dense_eig_sym(Matrix{{2, 1, 0}, {1, 2, 0}, {0, 0, -1}});
  ASSERT_EQ(s.values.size(), 3u);
  EXPECT_NEAR(s.values[0], 3.0, 1e-12);
  EXPECT_NEAR(s.values[1], 1.0, 1e-12);
  EXPECT_NEAR(s.values[2], -1.0, 1e-12);
  EXPECT_NEAR(std::abs(s.vectors(2, 2)), 1.0, 1e-12);
}

TEST(Oracle, MinimalPerturbationOfTheReference) {
  const double p = rrl::testing::kRefP;
  const Vector g{-2 * (1 - p), 0.0};
  const Matrix h{{4 * p * (1 - p), 0.0}, {0.0, 0.0}};
  const MinPerturbation l2 =
      min_pert_quadratic(rrl::testing::kRefLoss, g, h, std::log(2.0), Norm::l2, 200);
  EXPECT_NEAR(l2.radius, 0.51349, 1e-5);
  EXPECT_TRUE(l2.confirmed);
  const MinPerturbation li =
      min_pert_quadratic(rrl::testing::kRefLoss, g, h, std::log(2.0), Norm::linf, 200);
  EXPECT_NEAR(li.radius, 0.51349, 1e-5);
}

TEST(Oracle, BoxMaximumByVertexEnumeration) {
  const double p = rrl::testing::kRefP;
  const Vector g{-2 * (1 - p), 0.0};
  const Matrix h{{4 * p * (1 - p), 0.0}, {0.0, 0.0}};
  const BoxMaximum m = max_loss_box(rrl::testing::kRefLoss, g, h, 0.1);
  EXPECT_NEAR(m.value, 0.370982, 1e-6);
  EXPECT_DOUBLE_EQ(m.maximizer[0], -0.1);
  EXPECT_THROW(max_loss_box(0.0, Vector(13), Matrix(13, 13), 0.1), std::length_error);
}

TEST(Oracle, PatternOracleAgreesWithTheNetwork) {
  std::mt19937_64 rng(59);
  for (int t = 0; t < 20; ++t) {
    const Network net = Network::random({3, 7, 5, 2}, Activation::leaky(0.3), true, rng);
    const Vector x = rrl::testing::gaussian(rng, 3);
    EXPECT_EQ(activation_pattern(net, x), pattern_naive(net, x));
  }
}
