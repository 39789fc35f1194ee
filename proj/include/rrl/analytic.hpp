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

#ifndef RRL_ANALYTIC_HPP
#define RRL_ANALYTIC_HPP

#include <cstddef>

#include "rrl/linalg.hpp"
#include "rrl/network.hpp"

namespace rrl {

/// Softmax/cross-entropy summary of one prediction.
///
/// Binary convention: class index 0 is the "+" class (y = +1, column v+),
/// class index 1 is the "-" class (y = -1, column v-).
struct PredictionRecord {
  Vector logits;
  Vector probs;
  std::size_t label = 0;
  double loss = 0.0;          ///< -log p_y
  double slack = 0.0;         ///< log K - loss
  double one_minus_py = 0.0;  ///< sum of the other probabilities, kept for precision near p_y = 1

  double p_y() const { return probs[label]; }
  std::size_t num_classes() const { return probs.size(); }
  bool correctly_classified() const { return argmax(logits) == label; }
};

PredictionRecord softmax_ce(const Vector& z, std::size_t y);

/// Hessian of the cross-entropy w.r.t. the input on an activation region, kept
/// in factored form: binary H = s w w^T, multi-class H = V (diag(p) - p p^T) V^T.
class FactoredHessian {
 public:
  static FactoredHessian rank_one(double scale, Vector w);
  static FactoredHessian multiclass(Matrix v, Vector probs);

  bool is_rank_one() const { return rank_one_; }
  std::size_t dim() const;
  double scale() const { return scale_; }
  const Vector& w() const { return w_; }

  Vector apply(const Vector& x) const;
  SymmetricOperator as_operator() const;
  /// Dense n x n form; refuses n > kMaxMaterialize.
  Matrix materialize() const;
  /// ||H||_2 and its unit eigenvector; closed form in the rank-one case,
  /// power iteration through the factors otherwise.
  EigenPair top_eigenpair(double tol = 1e-12, int max_iter = 100000) const;
  double spectral_norm(double tol = 1e-12, int max_iter = 100000) const;

  static constexpr std::size_t kMaxMaterialize = 256;

 private:
  bool rank_one_ = true;
  double scale_ = 0.0;
  Vector w_;
  Matrix v_;
  Vector probs_;
};

struct InputForms {
  Matrix jacobian;  ///< J = V
  Vector gradient;  ///< input-gradient of the loss
  FactoredHessian hessian;
};

/// Closed forms for K = 2: grad = y (p_y - 1)(v+ - v-),
/// H = p_y (1 - p_y)(v+ - v-)(v+ - v-)^T.
InputForms binary_forms(const LocalLinearMap& map, const PredictionRecord& rec);
/// Closed forms for any K: grad = V (p - onehot(y)), H = V (diag(p) - p p^T) V^T.
InputForms multiclass_forms(const LocalLinearMap& map, const PredictionRecord& rec);

/// Local cross-Lipschitz constant nu. K = 2: ||v+ - v-||_2. K > 2: the
/// multi-class form, see cross_lipschitz_multiclass.
double cross_lipschitz(const LocalLinearMap& map);
/// nu^2 = sum over ordered pairs i != j of ||v_i - v_j||^2 / K^2, for any K.
double cross_lipschitz_multiclass_sq(const Matrix& v);
/// mu = ||V||_F.
double lipschitz(const LocalLinearMap& map);

struct ColumnDifferenceNorms {
  double l1 = 0.0;
  double l2 = 0.0;
};
/// Norms of v+ - v-; K must be 2.
ColumnDifferenceNorms w_norms(const LocalLinearMap& map);

/// The three quantities of the multi-class chain ||grad||/2 <= ||H||_2 <= ||V||_F/2.
/// Reported only; the ordering is not scale invariant and can fail.
struct ChainDiagnostic {
  double half_grad_norm = 0.0;
  double hessian_norm = 0.0;
  double half_frobenius = 0.0;
  bool ordered() const {
    return half_grad_norm <= hessian_norm && hessian_norm <= half_frobenius;
  }
};
ChainDiagnostic multiclass_chain_diagnostic(const LocalLinearMap& map,
                                            const PredictionRecord& rec);

}  // namespace rrl

#endif  // RRL_ANALYTIC_HPP
