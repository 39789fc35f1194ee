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

#ifndef RRL_EXPERIMENTS_HPP
#define RRL_EXPERIMENTS_HPP

// The two theory experiments on binary final-layer models:
//  * nu^2/2 vs mu^2 penalties on fixed features reach the same optimum;
//  * from the Bayes-form initialization both penalties share one gradient flow.

#include <cstdint>
#include <vector>

#include "rrl/linalg.hpp"

namespace rrl {

/// A fixed hidden representation (rows = samples) with binary labels
/// (class 0 = y = +1).
struct FeatureProblem {
  Matrix features;
  std::vector<std::size_t> labels;
};

/// Gaussian inputs through one random ReLU layer; labels from a noisy random
/// linear teacher on the inputs.
FeatureProblem random_feature_problem(std::size_t n_samples, std::size_t input_dim,
                                      std::size_t n_features, std::uint64_t seed);

struct FinalLayerFit {
  Matrix v;  ///< m x 2, columns v+ and v-
  double ce = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  double nu = 0.0;
  double mu = 0.0;
};

struct EquivalenceRecord {
  double lambda = 0.0;
  FinalLayerFit cross_lipschitz;  ///< CE + lambda nu^2 / 2
  FinalLayerFit lipschitz;        ///< CE + lambda mu^2
  double sum_norm = 0.0;          ///< ||v+ + v-|| at the mu^2 optimum
  double diff_norm = 0.0;         ///< ||v+ - v-|| at the mu^2 optimum
  double nu_rel_gap = 0.0;
  double ce_rel_gap = 0.0;
  double objective_gap = 0.0;
};

/// Trains the bias-free final layer twice by damped Newton to gradient norm
/// `tol` and compares the optima.
EquivalenceRecord final_layer_equivalence(const Matrix& features,
                                          const std::vector<std::size_t>& labels, double lambda,
                                          double tol = 1e-7, int max_iter = 200);

enum class FlowInit { bayes, generic };

struct GradientFlowRecord {
  std::size_t dim = 0;
  double a = 0.0;
  double eta = 0.0;
  double lambda = 0.0;
  double step = 0.0;
  int steps = 0;
  double max_divergence = 0.0;    ///< max over t of ||V_nu(t) - V_mu(t)||_F
  double final_divergence = 0.0;
  Matrix v_cross_lipschitz;       ///< final iterates
  Matrix v_lipschitz;
};

/// Population gradient of the binary cross-entropy of a bias-free linear
/// model on the Gaussian mixture (x_1 ~ N(0,1), x_j ~ N(eta y, 1)), with
/// respect to w = v+ - v-. Uses Stein's lemma and Gauss-Hermite quadrature.
Vector population_ce_gradient(const Vector& w, double eta);

/// Gradient descent (step `step`, `steps` iterations) on CE + lambda nu^2 / 2
/// and on CE + lambda mu^2 from the same start. The Bayes-form start is
/// v+ = [0, a, ..., a], v- = -v+; the generic start is a seeded random V.
GradientFlowRecord gradient_flow_experiment(std::size_t dim, double a, double eta, double lambda,
                                            double step = 1e-3, int steps = 1000,
                                            FlowInit init = FlowInit::bayes,
                                            std::uint64_t seed = 7);

struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;  ///< for the weight exp(-t^2)
};
/// n-point rule by Newton iteration on the Hermite recurrence.
GaussHermite gauss_hermite(std::size_t n);

}  // namespace rrl

#endif  // RRL_EXPERIMENTS_HPP
