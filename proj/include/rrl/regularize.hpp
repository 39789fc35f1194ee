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

#ifndef RRL_REGULARIZE_HPP
#define RRL_REGULARIZE_HPP

#include <string>
#include <string_view>
#include <vector>

#include "rrl/analytic.hpp"
#include "rrl/network.hpp"

namespace rrl {

enum class RegularizerKind { none, jacobian, input_gradient, curvature, cross_lipschitz };

/// Stable CLI/config names: "none", "jacobian", "input-gradient", "curvature", "cross-lipschitz".
std::string to_string(RegularizerKind kind);
/// Throws std::invalid_argument on an unknown name.
RegularizerKind parse_regularizer(std::string_view name);
const std::vector<RegularizerKind>& all_regularizers();

/// lambda is a per-sample weight: a batch penalizes the mean of the
/// per-sample values.
struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::none;
  double lambda = 0.0;

  void validate() const;
  bool active() const { return kind != RegularizerKind::none && lambda != 0.0; }
};

/// Whether the kind has a closed form usable in training for K classes.
bool supports(RegularizerKind kind, std::size_t num_classes);

/// jacobian: lambda mu^2; input-gradient: lambda (1 - p_y)^2 nu^2;
/// curvature: lambda p_y (1 - p_y) nu^2; cross-lipschitz: lambda nu^2 / 2.
/// input-gradient and curvature need K = 2.
double reg_value(const RegularizerSpec& spec, const LocalLinearMap& map,
                 const PredictionRecord& rec);

/// Gradient of reg_value at (x, y) with respect to every weight and bias,
/// activation patterns held fixed.
ParamGradients reg_weight_gradient(const RegularizerSpec& spec, const Network& net,
                                   const Vector& x, std::size_t y);

/// ||H||_2 of the multi-class Hessian by power iteration through its factors.
/// Diagnostic only; not a training objective.
double curvature_estimate_mc(const LocalLinearMap& map, const PredictionRecord& rec);

}  // namespace rrl

#endif  // RRL_REGULARIZE_HPP
