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

#ifndef RRL_ATTACK_HPP
#define RRL_ATTACK_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rrl/data.hpp"
#include "rrl/network.hpp"

namespace rrl {

enum class AttackKind { fgsm, pgd, deepfool, cw };

std::string to_string(AttackKind kind);
/// Names: "fgsm", "pgd", "deepfool", "cw". Throws std::invalid_argument.
AttackKind parse_attack(std::string_view name);

struct AttackConfig {
  AttackKind kind = AttackKind::pgd;
  double epsilon = 0.1;  ///< l_inf budget (fgsm, pgd)
  double pgd_alpha = 0.0;  ///< 0 selects epsilon / 10
  int pgd_steps = 40;
  int pgd_restarts = 1;
  double overshoot = 0.02;
  int deepfool_max_iter = 50;
  double cw_c = 1.0;
  int cw_steps = 200;
  double cw_step_size = 0.01;
  int cw_doublings = 5;
  bool clip = false;  ///< keep x + r inside [0, 1]
  std::uint64_t seed = 0;

  void validate() const;
  double alpha() const { return pgd_alpha > 0.0 ? pgd_alpha : epsilon / 10.0; }
  /// One-line "key=value" summary of every hyperparameter, for output headers.
  std::string describe() const;
};

struct AttackResult {
  Vector perturbation;
  double l2 = 0.0;
  double linf = 0.0;
  bool success = false;    ///< prediction at x + r differs from the label
  int iterations = 0;
  bool exhausted = false;  ///< iteration budget ran out without success
  double loss = 0.0;       ///< cross-entropy at x + r

  /// Sets perturbation and the two norms together.
  void set_perturbation(Vector r);
};

/// r = eps * sign(grad_x L); zero gradient entries stay zero.
AttackResult fgsm(const Network& net, const Vector& x, std::size_t y, double eps,
                  bool clip = false);

/// Iterated signed ascent projected to the l_inf ball. The first restart starts
/// at 0, later ones uniformly inside the ball. Returns the highest-loss iterate
/// reached after a step (the start point is not a candidate).
AttackResult pgd(const Network& net, const Vector& x, std::size_t y, double eps, double alpha,
                 int steps, int restarts = 1, bool clip = false, std::uint64_t seed = 0);

/// Steps to the nearest linearized decision boundary until the prediction
/// leaves y; the accumulated r is scaled by (1 + overshoot). A point exactly on
/// the boundary (tie within 1e-12 of the logit scale) counts as flipped.
AttackResult deepfool(const Network& net, const Vector& x, std::size_t y, int max_iter = 50,
                      double overshoot = 0.02, bool clip = false);

/// Gradient descent on ||r||^2 + c max(z_y - max_{k != y} z_k, 0); returns the
/// smallest successful iterate. `doublings` extra runs with 2c, 4c, ... on failure.
AttackResult cw_l2(const Network& net, const Vector& x, std::size_t y, double c, int steps,
                   double step_size, bool clip = false, int doublings = 0);

AttackResult run_attack(const Network& net, const Vector& x, std::size_t y,
                        const AttackConfig& cfg);

/// True when some other logit is within the tie tolerance of (or above) z_y.
bool decision_flipped(const Vector& z, std::size_t y);

struct AttackSampleRow {
  std::size_t sample_id = 0;
  std::size_t label = 0;
  bool clean_correct = false;
  AttackResult result;
};

struct AttackMetrics {
  AttackConfig config;
  std::size_t n_samples = 0;
  double clean_acc = 0.0;
  double robust_acc = 0.0;     ///< fgsm/pgd; NaN for minimal-norm attacks
  double mean_min_l2 = 0.0;    ///< deepfool/cw over successful attacks; NaN otherwise
  double median_min_l2 = 0.0;
  std::size_t n_success = 0;
  std::vector<AttackSampleRow> rows;
};

/// Runs the attack on every sample (in index order). Misclassified samples are
/// not attacked: they count as non-robust and are excluded from the norm stats.
AttackMetrics evaluate(const Network& net, const Dataset& data, const AttackConfig& cfg,
                       bool keep_rows = false);

/// Aggregates recomputed from per-sample rows (used to audit evaluate()).
AttackMetrics aggregate_rows(const AttackConfig& cfg, std::vector<AttackSampleRow> rows);

}  // namespace rrl

#endif  // RRL_ATTACK_HPP
