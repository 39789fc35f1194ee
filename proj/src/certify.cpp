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

#include "rrl/certify.hpp"

#include <cmath>
#include <limits>

namespace rrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_binary_domain(double p_y, double slack) {
  if (!(p_y >= 0.5 && p_y <= 1.0))
    throw CertificationError("binary radius needs p_y in [1/2, 1], got " + std::to_string(p_y));
  if (slack < 0.0) throw CertificationError("negative slack: input is misclassified");
}

// (sqrt(1 + 2 p xi / (1 - p)) - 1) / (p * scale)
double binary_radius(double p_y, double one_minus_py, double scale, double slack) {
  check_binary_domain(p_y, slack);
  if (!(scale > 0.0)) throw CertificationError("column difference norm must be positive");
  if (p_y == 0.5 || slack == 0.0) return 0.0;
  if (one_minus_py <= 0.0) return kInf;
  return sqrt1p_minus1(2.0 * p_y * slack / one_minus_py) / (p_y * scale);
}

}  // namespace

double sqrt1p_minus1(double t) { return t / (std::sqrt(1.0 + t) + 1.0); }

TaylorRadiusBounds taylor_radius_bounds(const Vector& gradient, const FactoredHessian& hessian,
                                        double slack) {
  if (slack < 0.0) throw CertificationError("negative slack: input is misclassified");
  if (gradient.size() != hessian.dim()) throw DimensionError("taylor_radius_bounds: sizes differ");
  const EigenPair top = hessian.top_eigenpair();
  const double h = std::abs(top.value);
  const double g = norm(gradient, Norm::l2);
  const double gu = std::abs(dot(gradient, top.vector));
  auto radius = [&](double lin) {
    if (slack == 0.0) return 0.0;
    const double denom = lin + std::sqrt(lin * lin + 2.0 * h * slack);
    return denom > 0.0 ? 2.0 * slack / denom : kInf;
  };
  return {radius(g), radius(gu)};
}

double r2_analytic(double p_y, double one_minus_py, double nu, double slack) {
  return binary_radius(p_y, one_minus_py, nu, slack);
}

double rinf_analytic(double p_y, double one_minus_py, double w_l1, double slack) {
  return binary_radius(p_y, one_minus_py, w_l1, slack);
}

double r2_analytic(double p_y, double nu, double slack) {
  return r2_analytic(p_y, 1.0 - p_y, nu, slack);
}

double rinf_analytic(double p_y, double w_l1, double slack) {
  return rinf_analytic(p_y, 1.0 - p_y, w_l1, slack);
}

double worst_case_loss(double loss, double eps, double p_y, double w_l1) {
  if (eps < 0.0) throw std::invalid_argument("worst_case_loss: eps must be non-negative");
  const double q = 1.0 - p_y;
  return loss + eps * q * w_l1 + 0.5 * eps * eps * p_y * q * w_l1 * w_l1;
}

MulticlassLowerBounds mc_lower_bounds(double p_y, double nu_mc, double mu, double slack,
                                      std::size_t num_classes) {
  if (num_classes < 2) throw DimensionError("mc_lower_bounds: need K >= 2");
  const double k = static_cast<double>(num_classes);
  if (slack < 0.0 || p_y < 1.0 / k)
    throw CertificationError("multi-class bound needs p_y >= 1/K (non-negative slack)");
  MulticlassLowerBounds b;
  if (slack == 0.0) return b;
  const double q = 1.0 - p_y;
  if (q <= 0.0) return {kInf, kInf, kInf};
  if (!(mu > 0.0)) return {kInf, kInf, kInf};
  // Grad bound a = 2 q mu; Hessian bound h = K (K - 1) p q nu_pair^2 / 2.
  const double nu_pair_sq = nu_mc * nu_mc * k / (k - 1.0);
  const double a = 2.0 * q * mu;
  const double h_pairs = k * (k - 1.0) * p_y * q * nu_pair_sq / 2.0;
  b.xlip_bound = 2.0 * slack / (a + std::sqrt(a * a + 2.0 * h_pairs * slack));
  b.lip_bound = sqrt1p_minus1(p_y * slack / q) / (p_y * mu);
  b.best = std::max(b.xlip_bound, b.lip_bound);
  return b;
}

RobustnessCertificate certify(const Network& net, const Vector& x, std::size_t y, double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("certify: epsilon must be non-negative");
  const LocalLinearMap map = local_linear_map(net, x);
  const PredictionRecord rec = softmax_ce(map.logits(x), y);

  RobustnessCertificate c;
  c.num_classes = rec.num_classes();
  c.p_y = rec.p_y();
  c.loss = rec.loss;
  c.slack = rec.slack;
  c.nu = cross_lipschitz(map);
  c.mu = lipschitz(map);
  c.epsilon = epsilon;
  c.w_l1 = kNaN;
  if (c.num_classes == 2) c.w_l1 = w_norms(map).l1;

  if (!rec.correctly_classified() || rec.slack < 0.0) {
    c.status = CertStatus::uncertifiable;
    c.reason = "misclassified";
    c.r2_analytic = c.rinf_analytic = c.eta_star = kNaN;
    c.taylor_lower = c.taylor_upper = c.xlip_bound = c.lip_bound = kNaN;
    return c;
  }

  c.status = CertStatus::certified;
  if (c.num_classes == 2) {
    const InputForms f = binary_forms(map, rec);
    const TaylorRadiusBounds tb = taylor_radius_bounds(f.gradient, f.hessian, rec.slack);
    c.taylor_lower = tb.lower;
    c.taylor_upper = tb.upper;
    if (c.nu > 0.0) {
      c.r2_analytic = r2_analytic(c.p_y, rec.one_minus_py, c.nu, rec.slack);
      c.rinf_analytic = rinf_analytic(c.p_y, rec.one_minus_py, c.w_l1, rec.slack);
    } else {
      c.r2_analytic = c.rinf_analytic = rec.slack > 0.0 ? kInf : 0.0;
    }
    c.eta_star = worst_case_loss(rec.loss, epsilon, c.p_y, c.w_l1);
    c.xlip_bound = c.lip_bound = kNaN;
  } else {
    const InputForms f = multiclass_forms(map, rec);
    const TaylorRadiusBounds tb = taylor_radius_bounds(f.gradient, f.hessian, rec.slack);
    c.taylor_lower = tb.lower;
    c.taylor_upper = tb.upper;
    const MulticlassLowerBounds mc =
        mc_lower_bounds(c.p_y, c.nu, c.mu, rec.slack, c.num_classes);
    c.xlip_bound = mc.xlip_bound;
    c.lip_bound = mc.lip_bound;
    c.r2_analytic = c.rinf_analytic = c.eta_star = kNaN;
  }
  return c;
}

}  // namespace rrl
