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

#ifndef RRL_CERTIFY_HPP
#define RRL_CERTIFY_HPP

#include <stdexcept>
#include <string>

#include "rrl/analytic.hpp"
#include "rrl/network.hpp"

namespace rrl {

/// Raised when a certificate is requested for an input it does not cover
/// (misclassified, or a probability outside the formula's domain).
class CertificationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// All radii below are about the second-order Taylor model of the loss:
// the smallest r with L + grad^T r + r^T H r / 2 >= log K.

/// sqrt(1 + t) - 1 without cancellation for small t.
double sqrt1p_minus1(double t);

struct TaylorRadiusBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounds on the minimal l2 perturbation from ||grad||, ||H||_2 and the top
/// eigenvector u of H. Evaluated as 2 xi / (g + sqrt(g^2 + 2 h xi)), which is
/// the same expression with the removable singularity at g = 0 taken out.
/// Returns +inf when both grad and H vanish (the model never reaches the threshold).
TaylorRadiusBounds taylor_radius_bounds(const Vector& gradient, const FactoredHessian& hessian,
                                        double slack);

/// ||r*||_2 = (sqrt(1 + 2 p xi / (1 - p)) - 1) / (p nu), binary case.
double r2_analytic(double p_y, double nu, double slack);
/// Same with ||v+ - v-||_1 in place of nu: the minimal l_inf perturbation.
double rinf_analytic(double p_y, double w_l1, double slack);
/// Overloads that take 1 - p_y explicitly, for confident predictions.
double r2_analytic(double p_y, double one_minus_py, double nu, double slack);
double rinf_analytic(double p_y, double one_minus_py, double w_l1, double slack);

/// Worst-case quadratic-model loss over the l_inf ball of radius eps:
/// L + eps (1 - p) ||w||_1 + eps^2 p (1 - p) ||w||_1^2 / 2.
double worst_case_loss(double loss, double eps, double p_y, double w_l1);

struct MulticlassLowerBounds {
  double xlip_bound = 0.0;  ///< cross-Lipschitz / Lipschitz form
  double lip_bound = 0.0;   ///< Lipschitz-only form
  double best = 0.0;
};

/// Lower bounds on the minimal l2 perturbation for K classes.
/// `nu_mc` follows the library's multi-class convention (ordered pairs / K^2);
/// the cross-Lipschitz bound is evaluated with the pair-averaged value
/// nu_mc^2 * K / (K - 1), which is the normalization under which it is sound.
MulticlassLowerBounds mc_lower_bounds(double p_y, double nu_mc, double mu, double slack,
                                      std::size_t num_classes);

enum class CertStatus { certified, uncertifiable };

struct RobustnessCertificate {
  CertStatus status = CertStatus::uncertifiable;
  std::string reason;
  std::size_t num_classes = 0;
  double p_y = 0.0;
  double loss = 0.0;
  double slack = 0.0;
  double nu = 0.0;
  double mu = 0.0;
  double w_l1 = 0.0;  ///< binary only
  double epsilon = 0.0;
  double r2_analytic = 0.0;    ///< binary only
  double rinf_analytic = 0.0;  ///< binary only
  double eta_star = 0.0;       ///< binary only
  double taylor_lower = 0.0;
  double taylor_upper = 0.0;
  double xlip_bound = 0.0;  ///< multi-class only
  double lip_bound = 0.0;   ///< multi-class only

  bool certified() const { return status == CertStatus::certified; }
};

/// Full certificate at (x, y). Misclassified inputs yield status
/// `uncertifiable` with NaN radii, never zeros.
RobustnessCertificate certify(const Network& net, const Vector& x, std::size_t y, double epsilon);

}  // namespace rrl

#endif  // RRL_CERTIFY_HPP
