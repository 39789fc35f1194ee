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

#ifndef RRL_OBJECTIVE_HPP
#define RRL_OBJECTIVE_HPP

// Batched cross-entropy + regularizer evaluation and its weight gradient.
//
// The regularizers are functions of the per-sample local map V (and p_y),
// so the engine builds V for the whole batch with one GEMM per layer and
// backpropagates dReg/dV through the same chain. Patterns are frozen.

#include <span>
#include <vector>

#include "rrl/network.hpp"
#include "rrl/regularize.hpp"

namespace rrl {

struct ObjectiveOptions {
  bool cross_entropy = true;  ///< include the CE term
  bool gradients = true;      ///< fill BatchResult::grad
};

/// Sums over the batch (callers divide by count for means).
struct BatchResult {
  double ce_sum = 0.0;
  double reg_sum = 0.0;
  std::size_t correct = 0;
  std::size_t count = 0;
  ParamGradients grad;
};

/// `x` holds one sample per row.
BatchResult batch_objective(const Network& net, const Matrix& x,
                            std::span<const std::size_t> labels, const RegularizerSpec& reg,
                            ObjectiveOptions opt = {});

struct InputGradients {
  Matrix gradients;  ///< row b: d loss_b / d x_b
  std::vector<double> losses;
  std::vector<std::size_t> predictions;
};

/// Loss gradients with respect to the inputs, one row per sample.
InputGradients loss_input_gradients(const Network& net, const Matrix& x,
                                    std::span<const std::size_t> labels);

}  // namespace rrl

#endif  // RRL_OBJECTIVE_HPP
