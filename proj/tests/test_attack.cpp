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
#include "rrl/attack.hpp"
#include "rrl/oracle.hpp"
#include "rrl/train.hpp"

using namespace rrl;
using rrl::testing::gaussian;

TEST(Attack, NamesRoundTrip) {
  for (AttackKind k : {AttackKind::fgsm, AttackKind::pgd, AttackKind::deepfool, AttackKind::cw})
    EXPECT_EQ(parse_attack(to_string(k)), k);
  EXPECT_THROW(parse_attack("boundary"), std::invalid_argument);
}

TEST(Attack, DeepFoolReachesTheReferenceBoundary) {
  const AttackResult r =
      deepfool(rrl::testing::reference_net(), rrl::testing::reference_x(), 0, 50, 0.0);
  EXPECT_TRUE(r.success);  // lands exactly on the boundary; a tie counts
  EXPECT_NEAR(r.l2, 0.5, 1e-12);
  EXPECT_EQ(r.iterations, 1);
  const AttackResult o =
      deepfool(rrl::testing::reference_net(), rrl::testing::reference_x(), 0, 50, 0.02);
  EXPECT_NEAR(o.l2, 0.51, 1e-12);
}

TEST(Attack, FgsmIsTheBoxMaximizerOnLinearNets) {
  const Network net = rrl::testing::diagonal_net();
  const AttackResult r = fgsm(net, rrl::testing::diagonal_x(), 0, 0.1);
  EXPECT_DOUBLE_EQ(r.perturbation[0], -0.1);
  EXPECT_DOUBLE_EQ(r.perturbation[1], -0.1);
  EXPECT_DOUBLE_EQ(r.linf, 0.1);
  EXPECT_FALSE(r.success);
}

TEST(Attack, PgdStaysInTheBallAndBeatsFgsm) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 20; ++t) {
    const Network net = Network::random({6, 12, 3}, Activation::relu(), true, rng);
    const Vector x = gaussian(rng, 6);
    const std::size_t y = predict(net, x);
    const double eps = 0.3;
    const AttackResult f = fgsm(net, x, y, eps);
    // With alpha = eps the first PGD iterate is the FGSM point.
    const AttackResult p = pgd(net, x, y, eps, eps, 10, 1, false, 1);
    EXPECT_LE(p.linf, eps + 1e-15);
    EXPECT_GE(p.loss, f.loss - 1e-12);
  }
}

TEST(Attack, ClipKeepsInputsInTheUnitBox) {
  const Network net = make_network(4, {8}, 2, Activation::relu(), true, 2);
  const Vector x{0.0, 1.0, 0.05, 0.95};
  for (const AttackResult& r :
       {fgsm(net, x, 0, 0.2, true), pgd(net, x, 0, 0.2, 0.05, 20, 2, true, 3),
        deepfool(net, x, 0, 50, 0.02, true)}) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_GE(x[i] + r.perturbation[i], -1e-15);
      EXPECT_LE(x[i] + r.perturbation[i], 1.0 + 1e-15);
    }
  }
}

TEST(Attack, DeepFoolIsNoShorterThanTheLinearDistance) {
  // On a linear net the boundary distance is exact; DeepFool must not undercut it.
  std::mt19937_64 rng(47);
  for (int t = 0; t < 20; ++t) {
    const Network net({Matrix(5, 2, gaussian(rng, 10).values())}, {}, Activation::relu());
    const Vector x = gaussian(rng, 5);
    const std::size_t y = predict(net, x);
    const LocalLinearMap map = local_linear_map(net, x);
    const Vector w = map.column(0) - map.column(1);
    const Vector z = map.logits(x);
    const double dist = std::abs(z[0] - z[1]) / norm(w, Norm::l2);
    const AttackResult r = deepfool(net, x, y, 50, 0.0);
    EXPECT_TRUE(r.success);
    EXPECT_NEAR(r.l2, dist, 1e-10 * (1 + dist));
  }
}

TEST(Attack, CarliniWagnerFindsAnAdversary) {
  const AttackResult r =
      cw_l2(rrl::testing::reference_net(), rrl::testing::reference_x(), 0, 5.0, 500, 0.01);
  EXPECT_TRUE(r.success);
  EXPECT_GE(r.l2, 0.5 - 1e-12);
  EXPECT_LT(r.l2, 0.6);
}

TEST(Attack, EvaluateAggregatesMatchRows) {
  std::mt19937_64 rng(53);
  Dataset d;
  d.num_classes = 3;
  d.inputs = Matrix(30, 5, std::vector<double>(150));
  for (double& v : d.inputs.flat()) v = std::normal_distribution<double>()(rng);
  for (std::size_t i = 0; i < 30; ++i) d.labels.push_back(i % 3);
  const Network net = make_network(5, {10}, 3, Activation::relu(), true, 1);
  for (AttackKind k : {AttackKind::fgsm, AttackKind::deepfool}) {
    AttackConfig cfg;
    cfg.kind = k;
    const AttackMetrics m = evaluate(net, d, cfg, true);
    ASSERT_EQ(m.rows.size(), 30u);
    const AttackMetrics again = aggregate_rows(cfg, m.rows);
    EXPECT_EQ(again.n_success, m.n_success);
    EXPECT_DOUBLE_EQ(again.clean_acc, m.clean_acc);
    if (k == AttackKind::fgsm) {
      EXPECT_LE(m.robust_acc, m.clean_acc);
      EXPECT_TRUE(std::isnan(m.mean_min_l2));
    } else {
      EXPECT_TRUE(std::isnan(m.robust_acc));
      EXPECT_GT(m.mean_min_l2, 0.0);
    }
  }
}

TEST(Attack, ConfigValidation) {
  AttackConfig cfg;
  cfg.epsilon = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = AttackConfig{};
  cfg.pgd_steps = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_DOUBLE_EQ(AttackConfig{}.alpha(), 0.01);
}
