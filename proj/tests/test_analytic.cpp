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
#include "rrl/analytic.hpp"
#include "rrl/oracle.hpp"

using namespace rrl;
using rrl::testing::gaussian;

TEST(Analytic, ReferencePrediction) {
  const PredictionRecord rec = softmax_ce(Vector{0.5, -0.5}, 0);
  EXPECT_NEAR(rec.p_y(), 0.731059, 1e-6);
  EXPECT_NEAR(rec.loss, 0.313262, 1e-6);
  EXPECT_NEAR(rec.slack, 0.379885, 1e-6);
  EXPECT_NEAR(rec.one_minus_py, 1.0 - rec.p_y(), 1e-15);
}

TEST(Analytic, SoftmaxIsStableForHugeLogits) {
  const PredictionRecord rec = softmax_ce(Vector{800.0, 0.0, -800.0}, 1);
  EXPECT_TRUE(std::isfinite(rec.loss));
  EXPECT_NEAR(rec.loss, 800.0, 1e-9);
  EXPECT_NEAR(softmax_ce(Vector{800.0, 0.0}, 0).one_minus_py, std::exp(-800.0), 1e-300);
}

TEST(Analytic, ReferenceClosedForms) {
  const LocalLinearMap map =
      local_linear_map(rrl::testing::reference_net(), rrl::testing::reference_x());
  const PredictionRecord rec = softmax_ce(map.logits(rrl::testing::reference_x()), 0);
  EXPECT_DOUBLE_EQ(cross_lipschitz(map), 2.0);
  EXPECT_DOUBLE_EQ(lipschitz(map), std::sqrt(2.0));
  const InputForms f = binary_forms(map, rec);
  EXPECT_NEAR(f.gradient[0], -0.537883, 1e-6);
  EXPECT_EQ(f.gradient[1], 0.0);
  EXPECT_NEAR(f.hessian.spectral_norm(), 0.786448, 1e-6);
  EXPECT_NEAR(f.hessian.scale(), 0.196612, 1e-6);
  const ColumnDifferenceNorms w = w_norms(map);
  EXPECT_DOUBLE_EQ(w.l1, 2.0);
  EXPECT_DOUBLE_EQ(w.l2, 2.0);
}

TEST(Analytic, BinaryMatchesMulticlassAtTwoClasses) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 25; ++t) {
    const Network net = Network::random({5, 8, 2}, Activation::leaky(0.1), true, rng);
    const Vector x = gaussian(rng, 5);
    const LocalLinearMap map = local_linear_map(net, x);
    const std::size_t y = t % 2;
    const PredictionRecord rec = softmax_ce(map.logits(x), y);
    const InputForms b = binary_forms(map, rec), m = multiclass_forms(map, rec);
    EXPECT_LT(relative_error(b.gradient, m.gradient), 1e-12);
    EXPECT_LT(relative_error(b.hessian.materialize(), m.hessian.materialize()), 1e-12);
    // At K = 2 the multi-class nu^2 is ||v+ - v-||^2 / 2.
    const double nu = cross_lipschitz(map);
    EXPECT_NEAR(cross_lipschitz_multiclass_sq(map.v), nu * nu / 2, 1e-12 * nu * nu);
  }
}

TEST(Analytic, GradientAndHessianMatchFiniteDifferences) {
  std::mt19937_64 rng(23);
  int checked = 0;
  for (int t = 0; t < 40 && checked < 15; ++t) {
    const std::size_t k = t % 2 ? 3 : 2;
    const Network net = Network::random({4, 10, 6, k}, Activation::relu(), true, rng);
    const Vector x = gaussian(rng, 4);
    if (boundary_margin(net, x) < 0.05) continue;
    const std::size_t y = t % k;
    const LocalLinearMap map = local_linear_map(net, x);
    const PredictionRecord rec = softmax_ce(map.logits(x), y);
    const InputForms f = multiclass_forms(map, rec);
    const ScalarField loss = [&](const Vector& u) { return ce_loss_naive(logits(net, u), y); };
    EXPECT_LT(relative_error(f.gradient, fd_gradient(loss, x)), 1e-6);
    EXPECT_LT(relative_error(f.hessian.materialize(), fd_hessian(loss, x)), 1e-4);
    ++checked;
  }
  EXPECT_GE(checked, 10);
}

TEST(Analytic, BinaryNormIdentities) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 20; ++t) {
    const Network net = Network::random({6, 12, 2}, Activation::relu(), true, rng);
    const Vector x = gaussian(rng, 6);
    const LocalLinearMap map = local_linear_map(net, x);
    const PredictionRecord rec = softmax_ce(map.logits(x), 1);
    const InputForms f = binary_forms(map, rec);
    const double nu = cross_lipschitz(map);
    EXPECT_NEAR(norm(f.gradient, Norm::l2), rec.one_minus_py * nu, 1e-12 * (1 + nu));
    EXPECT_NEAR(f.hessian.spectral_norm(), rec.p_y() * rec.one_minus_py * nu * nu,
                1e-12 * (1 + nu * nu));
  }
}

TEST(Analytic, MulticlassChainIsOnlyADiagnostic) {
  const LocalLinearMap map =
      local_linear_map(rrl::testing::reference_net(), rrl::testing::reference_x());
  const ChainDiagnostic d = multiclass_chain_diagnostic(map, softmax_ce(Vector{0.5, -0.5}, 0));
  EXPECT_NEAR(d.half_frobenius, std::sqrt(2.0) / 2, 1e-12);
  EXPECT_GT(d.hessian_norm, d.half_frobenius);  // the chain fails here
  EXPECT_FALSE(d.ordered());
}

TEST(Analytic, MaterializeRefusesLargeDimensions) {
  const FactoredHessian h = FactoredHessian::rank_one(1.0, Vector(300, 1.0));
  EXPECT_THROW(h.materialize(), std::length_error);
  EXPECT_NEAR(h.spectral_norm(), 300.0, 1e-9);
}
