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

#include "rrl/regularize.hpp"

#include <cmath>
#include <stdexcept>

#include "rrl/objective.hpp"

namespace rrl {

std::string to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::none: return "none";
    case RegularizerKind::jacobian: return "jacobian";
    case RegularizerKind::input_gradient: return "input-gradient";
    case RegularizerKind::curvature: return "curvature";
    case RegularizerKind::cross_lipschitz: return "cross-lipschitz";
  }
  return "?";
}

RegularizerKind parse_regularizer(std::string_view name) {
  for (RegularizerKind k : all_regularizers())
    if (to_string(k) == name) return k;
  if (name == "none") return RegularizerKind::none;
  throw std::invalid_argument("unknown regularizer '" + std::string(name) +
                              "' (expected jacobian, input-gradient, curvature, "
                              "cross-lipschitz or none)");
}

const std::vector<RegularizerKind>& all_regularizers() {
  static const std::vector<RegularizerKind> kinds = {
      RegularizerKind::jacobian, RegularizerKind::input_gradient, RegularizerKind::curvature,
      RegularizerKind::cross_lipschitz};
  return kinds;
}

void RegularizerSpec::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw std::invalid_argument("regularizer weight must be finite and non-negative");
}

bool supports(RegularizerKind kind, std::size_t num_classes) {
  switch (kind) {
    case RegularizerKind::input_gradient:
    case RegularizerKind::curvature:
      return num_classes == 2;
    default:
      return num_classes >= 2;
  }
}

double reg_value(const RegularizerSpec& spec, const LocalLinearMap& map,
                 const PredictionRecord& rec) {
  spec.validate();
  const std::size_t k = map.num_classes();
  if (!supports(spec.kind, k))
    throw std::invalid_argument(to_string(spec.kind) + " has no closed form for K = " +
                                std::to_string(k));
  if (spec.lambda == 0.0) return 0.0;
  switch (spec.kind) {
    case RegularizerKind::none:
      return 0.0;
    case RegularizerKind::jacobian: {
      const double mu = lipschitz(map);
      return spec.lambda * mu * mu;
    }
    case RegularizerKind::cross_lipschitz: {
      const double nu = cross_lipschitz(map);
      return spec.lambda * nu * nu / 2.0;
    }
    case RegularizerKind::input_gradient: {
      const double nu = cross_lipschitz(map);
      const double q = rec.one_minus_py;
      return spec.lambda * q * q * nu * nu;
    }
    case RegularizerKind::curvature: {
      const double nu = cross_lipschitz(map);
      return spec.lambda * rec.p_y() * rec.one_minus_py * nu * nu;
    }
  }
  return 0.0;
}

ParamGradients reg_weight_gradient(const RegularizerSpec& spec, const Network& net,
                                   const Vector& x, std::size_t y) {
  if (x.size() != net.input_dim()) throw DimensionError("reg_weight_gradient: input width");
  Matrix batch(1, x.size(), x.values());
  const std::size_t labels[1] = {y};
  ObjectiveOptions opt;
  opt.cross_entropy = false;
  return batch_objective(net, batch, labels, spec, opt).grad;
}

double curvature_estimate_mc(const LocalLinearMap& map, const PredictionRecord& rec) {
  return multiclass_forms(map, rec).hessian.spectral_norm(1e-10);
}

}  // namespace rrl
