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

#include "rrl/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rrl {

PredictionRecord softmax_ce(const Vector& z, std::size_t y) {
  if (z.size() < 2) throw DimensionError("softmax_ce: need at least two logits");
  if (y >= z.size()) throw std::out_of_range("softmax_ce: label out of range");
  if (!all_finite(z.span())) throw std::invalid_argument("softmax_ce: non-finite logits");
  PredictionRecord rec;
  rec.logits = z;
  rec.label = y;
  const double zmax = *std::max_element(z.begin(), z.end());
  rec.probs = Vector(z.size());
  double total = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    rec.probs[k] = std::exp(z[k] - zmax);
    total += rec.probs[k];
  }
  for (double& p : rec.probs) p /= total;
  if (z[y] == zmax) {
    // sum_{k != y} exp(z_k - z_y) <= K - 1: accurate when the true class dominates.
    double others = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k)
      if (k != y) others += std::exp(z[k] - z[y]);
    rec.loss = std::log1p(others);
    rec.one_minus_py = others / (1.0 + others);
  } else {
    rec.loss = std::log(total) + (zmax - z[y]);
    double q = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k)
      if (k != y) q += rec.probs[k];
    rec.one_minus_py = q;
  }
  rec.slack = std::log(static_cast<double>(z.size())) - rec.loss;
  return rec;
}

FactoredHessian FactoredHessian::rank_one(double scale, Vector w) {
  FactoredHessian h;
  h.rank_one_ = true;
  h.scale_ = scale;
  h.w_ = std::move(w);
  return h;
}

FactoredHessian FactoredHessian::multiclass(Matrix v, Vector probs) {
  if (v.cols() != probs.size()) throw DimensionError("multiclass Hessian: V and p disagree");
  FactoredHessian h;
  h.rank_one_ = false;
  h.v_ = std::move(v);
  h.probs_ = std::move(probs);
  return h;
}

std::size_t FactoredHessian::dim() const { return rank_one_ ? w_.size() : v_.rows(); }

Vector FactoredHessian::apply(const Vector& x) const {
  if (x.size() != dim()) throw DimensionError("FactoredHessian::apply: size mismatch");
  if (rank_one_) return (scale_ * dot(w_, x)) * w_;
  Vector t = matvec_t(v_, x);
  const double pt = dot(probs_, t);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = probs_[k] * (t[k] - pt);
  return matvec(v_, t);
}

SymmetricOperator FactoredHessian::as_operator() const {
  return {dim(), [this](const Vector& x) { return apply(x); }};
}

Matrix FactoredHessian::materialize() const {
  const std::size_t n = dim();
  if (n > kMaxMaterialize)
    throw std::length_error("refusing to materialize a Hessian with n > 256");
  if (rank_one_) {
    Matrix h = outer(w_, w_);
    h *= scale_;
    return h;
  }
  const std::size_t k_count = probs_.size();
  Matrix m(k_count, k_count);
  for (std::size_t i = 0; i < k_count; ++i)
    for (std::size_t j = 0; j < k_count; ++j)
      m(i, j) = (i == j ? probs_[i] : 0.0) - probs_[i] * probs_[j];
  return matmul_nt(matmul(v_, m), v_);
}

EigenPair FactoredHessian::top_eigenpair(double tol, int max_iter) const {
  if (rank_one_) {
    const double wn = norm(w_, Norm::l2);
    if (wn == 0.0 || scale_ == 0.0) {
      Vector e(w_.size());
      if (!e.empty()) e[0] = 1.0;
      return {0.0, e, 0};
    }
    return {scale_ * wn * wn, (1.0 / wn) * w_, 0};
  }
  return top_eigpair_sym(as_operator(), tol, max_iter);
}

double FactoredHessian::spectral_norm(double tol, int max_iter) const {
  return std::abs(top_eigenpair(tol, max_iter).value);
}

namespace {

Vector column_difference(const LocalLinearMap& map) {
  if (map.num_classes() != 2) throw DimensionError("binary form requires K == 2");
  return map.column(0) - map.column(1);
}

}  // namespace

InputForms binary_forms(const LocalLinearMap& map, const PredictionRecord& rec) {
  if (rec.num_classes() != 2) throw DimensionError("binary_forms requires K == 2");
  Vector w = column_difference(map);
  const double y_sign = rec.label == 0 ? 1.0 : -1.0;
  const double p = rec.p_y();
  InputForms f;
  f.jacobian = map.v;
  f.gradient = (-y_sign * rec.one_minus_py) * w;
  f.hessian = FactoredHessian::rank_one(p * rec.one_minus_py, std::move(w));
  return f;
}

InputForms multiclass_forms(const LocalLinearMap& map, const PredictionRecord& rec) {
  if (rec.num_classes() != map.num_classes())
    throw DimensionError("multiclass_forms: class counts differ");
  Vector residual = rec.probs;
  residual[rec.label] = -rec.one_minus_py;
  InputForms f;
  f.jacobian = map.v;
  f.gradient = matvec(map.v, residual);
  f.hessian = FactoredHessian::multiclass(map.v, rec.probs);
  return f;
}

double cross_lipschitz_multiclass_sq(const Matrix& v) {
  const std::size_t k_count = v.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < k_count; ++i)
    for (std::size_t j = 0; j < k_count; ++j) {
      if (i == j) continue;
      for (std::size_t r = 0; r < v.rows(); ++r) {
        const double d = v(r, i) - v(r, j);
        total += d * d;
      }
    }
  return total / static_cast<double>(k_count * k_count);
}

double cross_lipschitz(const LocalLinearMap& map) {
  if (map.num_classes() == 2) return norm(column_difference(map), Norm::l2);
  return std::sqrt(cross_lipschitz_multiclass_sq(map.v));
}

double lipschitz(const LocalLinearMap& map) { return frobenius(map.v); }

ColumnDifferenceNorms w_norms(const LocalLinearMap& map) {
  const Vector w = column_difference(map);
  return {norm(w, Norm::l1), norm(w, Norm::l2)};
}

ChainDiagnostic multiclass_chain_diagnostic(const LocalLinearMap& map,
                                            const PredictionRecord& rec) {
  const InputForms f = multiclass_forms(map, rec);
  return {norm(f.gradient, Norm::l2) / 2.0, f.hessian.spectral_norm(1e-10),
          frobenius(map.v) / 2.0};
}

}  // namespace rrl
