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

#include "rrl/data.hpp"
#include "rrl/experiments.hpp"

using namespace rrl;

TEST(Experiments, GaussHermiteIntegratesPolynomials) {
  const GaussHermite q = gauss_hermite(20);
  double m0 = 0.0, m2 = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double t = q.nodes[i];
    m0 += q.weights[i];
    m2 += q.weights[i] * t * t;
    m4 += q.weights[i] * t * t * t * t;
  }
  const double sp = std::sqrt(M_PI);
  EXPECT_NEAR(m0, sp, 1e-13);
  EXPECT_NEAR(m2, sp / 2, 1e-13);
  EXPECT_NEAR(m4, 3 * sp / 4, 1e-12);
}

TEST(Experiments, PopulationGradientAtZero) {
  // -E[y x] / 2 = (0, -eta/2, ..., -eta/2).
  const Vector g = population_ce_gradient(Vector(4, 0.0), 0.7);
  EXPECT_NEAR(g[0], 0.0, 1e-14);
  for (std::size_t j = 1; j < 4; ++j) EXPECT_NEAR(g[j], -0.35, 1e-12);
}

TEST(Experiments, PopulationGradientMatchesMonteCarlo) {
  const Vector w{0.3, -0.2, 0.5, 0.1};
  const double eta = 0.6;
  const Dataset d = synth_tsipras(400000, 4, eta, 13);
  Vector mc(4);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double y = d.labels[i] == 0 ? 1.0 : -1.0;
    double t = 0.0;
    for (std::size_t j = 0; j < 4; ++j) t += w[j] * d.inputs(i, j);
    const double s = 1.0 / (1.0 + std::exp(y * t));  // sigma(-y t)
    for (std::size_t j = 0; j < 4; ++j) mc[j] -= y * s * d.inputs(i, j);
  }
  const Vector g = population_ce_gradient(w, eta);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(g[j], mc[j] / 400000.0, 4e-3) << j;
}

TEST(Experiments, FinalLayerEquivalence) {
  const FeatureProblem prob = random_feature_problem(200, 5, 12, 3);
  const EquivalenceRecord r = final_layer_equivalence(prob.features, prob.labels, 0.1);
  EXPECT_TRUE(r.cross_lipschitz.converged);
  EXPECT_TRUE(r.lipschitz.converged);
  EXPECT_LE(r.sum_norm, 1e-3 * r.diff_norm);
  EXPECT_LE(r.nu_rel_gap, 1e-4);
  EXPECT_LE(r.ce_rel_gap, 1e-4);
}

TEST(Experiments, GradientFlowFromTheBayesFormStart) {
  const GradientFlowRecord r = gradient_flow_experiment(5, 0.2, 0.5, 0.1, 1e-3, 200);
  EXPECT_LE(r.max_divergence, 1e-6);
  // A generic start separates the two flows.
  const GradientFlowRecord g =
      gradient_flow_experiment(5, 0.2, 0.5, 0.1, 1e-3, 200, FlowInit::generic, 7);
  EXPECT_GT(g.max_divergence, 1e-4);
}
