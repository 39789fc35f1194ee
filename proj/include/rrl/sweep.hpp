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

#ifndef RRL_SWEEP_HPP
#define RRL_SWEEP_HPP

// Baseline -> fine-tune -> attack grid over (regularizer, lambda, seed).
//
// One baseline is trained per seed. The lambda = 0 fine-tune does not depend
// on the regularizer kind, so it is run once per seed and reported under
// every kind. Divergent runs are results, not errors.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rrl/attack.hpp"
#include "rrl/certify.hpp"
#include "rrl/data.hpp"
#include "rrl/network.hpp"
#include "rrl/train.hpp"

namespace rrl {

struct SweepConfig {
  std::vector<std::size_t> hidden{300, 100};
  Activation activation = Activation::relu();
  bool bias = true;
  std::vector<RegularizerKind> kinds = all_regularizers();
  std::vector<double> lambdas{0.0, 0.01, 0.1, 1.0};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<AttackConfig> attacks;
  TrainConfig baseline = baseline_defaults();
  TrainConfig finetune = finetune_defaults();
  std::size_t eval_samples = 0;  ///< first N test samples attacked; 0 = all
  std::size_t cert_samples = 0;  ///< first N test samples certified; 0 = all
  double cert_epsilon = 0.1;
  std::size_t jobs = 1;
  std::string model_prefix = "m";
  std::filesystem::path weights_dir;  ///< per-run weight files when non-empty

  void validate(std::size_t num_classes) const;
};

struct CertificateSummary {
  std::size_t n_certified = 0;
  double median_radius = 0.0;  ///< binary: analytic l2 radius; K > 2: best lower bound
  double median_taylor_lower = 0.0;
  double median_nu = 0.0;
  double median_mu = 0.0;
};

struct RunRecord {
  std::string model_id;
  std::uint64_t seed = 0;
  RegularizerKind kind = RegularizerKind::none;
  double lambda = 0.0;
  bool shared = false;  ///< lambda = 0 run reported under this kind
  bool diverged = false;
  std::string divergence;  ///< message when diverged
  int divergence_epoch = 0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double final_objective = 0.0;
  double seconds = 0.0;
  std::string weights_checksum;  ///< empty when weights are not written
  std::vector<AttackMetrics> attacks;  ///< one per SweepConfig::attacks, rows dropped
  CertificateSummary certificates;
  std::vector<RobustnessCertificate> certificate_rows;
};

/// Seed average at one (kind, lambda, attack); divergent runs excluded.
struct MeanRecord {
  RegularizerKind kind = RegularizerKind::none;
  double lambda = 0.0;
  AttackConfig attack;
  std::size_t n_seeds = 0;
  std::size_t n_divergent = 0;
  double clean_acc = 0.0;
  double robust_acc = 0.0;
  double mean_min_l2 = 0.0;
  double median_min_l2 = 0.0;
  double cert_median_radius = 0.0;
  std::size_t n_samples = 0;
};

struct BaselineRecord {
  std::uint64_t seed = 0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double seconds = 0.0;
  std::vector<EpochRecord> trace;
};

struct SweepResult {
  std::vector<BaselineRecord> baselines;
  std::vector<RunRecord> runs;  ///< ordered by (kind, lambda, seed)
  std::vector<MeanRecord> means;
  double seconds = 0.0;
};

/// Called after every finished run (from worker threads, serialized).
using SweepProgress = std::function<void(const RunRecord&)>;

/// Throws DivergenceError only if a baseline diverges.
SweepResult run_sweep(const SweepConfig& cfg, const Dataset& train, const Dataset& test,
                      const SweepProgress& progress = {});

/// Averages over seeds; recomputable from the runs alone.
std::vector<MeanRecord> average_runs(const SweepConfig& cfg, const std::vector<RunRecord>& runs);

/// A (kind, lambda) cell is stable when no seed diverged and its mean clean
/// accuracy is within `max_acc_drop` of the lambda = 0 cell.
bool is_stable(const std::vector<MeanRecord>& means, RegularizerKind kind, double lambda,
               double max_acc_drop = 0.05);

/// Largest lambda > 0 at which every kind is stable; 0 if none.
double largest_mutually_stable_lambda(const SweepConfig& cfg, const std::vector<MeanRecord>& means,
                                      double max_acc_drop = 0.05);

/// The mean record for (kind, lambda, attack kind); nullptr if absent.
const MeanRecord* find_mean(const std::vector<MeanRecord>& means, RegularizerKind kind,
                            double lambda, AttackKind attack);

CertificateSummary summarize_certificates(const std::vector<RobustnessCertificate>& certs);

double median(std::vector<double> values);
/// Linear-interpolated percentile, q in [0, 1]; NaN for an empty input.
double percentile(std::vector<double> values, double q);

}  // namespace rrl

#endif  // RRL_SWEEP_HPP
