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

#include "rrl/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "rrl/serialize.hpp"

namespace rrl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Fine-tuning reshuffles with a stream unrelated to the baseline's.
constexpr std::uint64_t kFinetuneSeedOffset = 7919;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format_lambda(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", lambda);
  return buf;
}

std::string model_id(const SweepConfig& cfg, std::uint64_t seed, RegularizerKind kind,
                     double lambda) {
  return cfg.model_prefix + "-s" + std::to_string(seed) + "-" + to_string(kind) + "-l" +
         format_lambda(lambda);
}

Dataset head(const Dataset& d, std::size_t n) {
  if (n == 0 || n >= d.size()) return d;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return subset(d, idx);
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; the first exception
/// is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct Task {
  std::uint64_t seed;
  std::size_t seed_index;
  RegularizerKind kind;  ///< none for the shared lambda = 0 run
  double lambda;
};

}  // namespace

void SweepConfig::validate(std::size_t num_classes) const {
  if (seeds.empty()) throw std::invalid_argument("sweep: no seeds");
  if (lambdas.empty()) throw std::invalid_argument("sweep: empty lambda grid");
  if (kinds.empty()) throw std::invalid_argument("sweep: no regularizer kinds");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 0.0) || !std::isfinite(lambdas[i]))
      throw std::invalid_argument("sweep: lambda values must be finite and >= 0");
    if (std::find(lambdas.begin(), lambdas.begin() + i, lambdas[i]) != lambdas.begin() + i)
      throw std::invalid_argument("sweep: duplicate lambda " + format_lambda(lambdas[i]));
  }
  for (RegularizerKind k : kinds) {
    if (k == RegularizerKind::none)
      throw std::invalid_argument("sweep: 'none' is implied by lambda = 0");
    if (!supports(k, num_classes))
      throw std::invalid_argument("sweep: regularizer '" + to_string(k) +
                                  "' has no training form for K = " +
                                  std::to_string(num_classes));
  }
  for (std::size_t i = 0; i < attacks.size(); ++i) {
    attacks[i].validate();
    for (std::size_t j = 0; j < i; ++j)
      if (attacks[j].kind == attacks[i].kind)
        throw std::invalid_argument("sweep: attack '" + to_string(attacks[i].kind) +
                                    "' listed twice");
  }
  baseline.validate();
  finetune.validate();
  if (jobs == 0) throw std::invalid_argument("sweep: jobs must be >= 1");
}

double median(std::vector<double> values) { return percentile(std::move(values), 0.5); }

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

CertificateSummary summarize_certificates(const std::vector<RobustnessCertificate>& certs) {
  std::vector<double> radius, taylor, nu, mu;
  for (const auto& c : certs) {
    if (!c.certified()) continue;
    radius.push_back(c.num_classes == 2 ? c.r2_analytic : std::max(c.xlip_bound, c.lip_bound));
    taylor.push_back(c.taylor_lower);
    nu.push_back(c.nu);
    mu.push_back(c.mu);
  }
  CertificateSummary s;
  s.n_certified = radius.size();
  s.median_radius = median(radius);
  s.median_taylor_lower = median(taylor);
  s.median_nu = median(nu);
  s.median_mu = median(mu);
  return s;
}

std::vector<MeanRecord> average_runs(const SweepConfig& cfg, const std::vector<RunRecord>& runs) {
  std::vector<MeanRecord> out;
  for (RegularizerKind kind : cfg.kinds) {
    for (double lambda : cfg.lambdas) {
      for (std::size_t a = 0; a < cfg.attacks.size(); ++a) {
        MeanRecord m;
        m.kind = kind;
        m.lambda = lambda;
        m.attack = cfg.attacks[a];
        double clean = 0.0, robust = 0.0, mean_l2 = 0.0, med_l2 = 0.0, cert = 0.0;
        for (const RunRecord& r : runs) {
          if (r.kind != kind || r.lambda != lambda) continue;
          if (r.diverged) {
            ++m.n_divergent;
            continue;
          }
          const AttackMetrics& am = r.attacks.at(a);
          ++m.n_seeds;
          clean += am.clean_acc;
          robust += am.robust_acc;
          mean_l2 += am.mean_min_l2;
          med_l2 += am.median_min_l2;
          cert += r.certificates.median_radius;
          m.n_samples = am.n_samples;
        }
        const double n = static_cast<double>(m.n_seeds);
        const bool any = m.n_seeds > 0;
        m.clean_acc = any ? clean / n : kNaN;
        m.robust_acc = any ? robust / n : kNaN;
        m.mean_min_l2 = any ? mean_l2 / n : kNaN;
        m.median_min_l2 = any ? med_l2 / n : kNaN;
        m.cert_median_radius = any ? cert / n : kNaN;
        out.push_back(m);
      }
    }
  }
  return out;
}

const MeanRecord* find_mean(const std::vector<MeanRecord>& means, RegularizerKind kind,
                            double lambda, AttackKind attack) {
  for (const auto& m : means)
    if (m.kind == kind && m.lambda == lambda && m.attack.kind == attack) return &m;
  return nullptr;
}

bool is_stable(const std::vector<MeanRecord>& means, RegularizerKind kind, double lambda,
               double max_acc_drop) {
  const MeanRecord* cell = nullptr;
  const MeanRecord* base = nullptr;
  for (const auto& m : means) {
    if (m.kind != kind) continue;
    if (m.lambda == lambda && !cell) cell = &m;
    if (m.lambda == 0.0 && !base) base = &m;
  }
  if (!cell || cell->n_divergent > 0 || cell->n_seeds == 0) return false;
  if (!base) return true;
  return cell->clean_acc >= base->clean_acc - max_acc_drop;
}

double largest_mutually_stable_lambda(const SweepConfig& cfg, const std::vector<MeanRecord>& means,
                                      double max_acc_drop) {
  double best = 0.0;
  for (double lambda : cfg.lambdas) {
    if (lambda <= best) continue;
    bool all = true;
    for (RegularizerKind k : cfg.kinds) all = all && is_stable(means, k, lambda, max_acc_drop);
    if (all) best = lambda;
  }
  return best;
}

SweepResult run_sweep(const SweepConfig& cfg, const Dataset& train_set, const Dataset& test_set,
                      const SweepProgress& progress) {
  cfg.validate(train_set.num_classes);
  if (train_set.empty() || test_set.empty()) throw std::invalid_argument("sweep: empty data");
  if (train_set.dim() != test_set.dim() || train_set.num_classes != test_set.num_classes)
    throw DimensionError("sweep: train/test shapes differ");
  const auto t0 = Clock::now();
  if (!cfg.weights_dir.empty()) std::filesystem::create_directories(cfg.weights_dir);

  const Dataset eval_set = head(test_set, cfg.eval_samples);
  const Dataset cert_set = head(test_set, cfg.cert_samples);

  SweepResult result;
  result.baselines.resize(cfg.seeds.size());
  std::vector<Network> baseline_nets(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
    const auto s0 = Clock::now();
    const std::uint64_t seed = cfg.seeds[i];
    const Network init = make_network(train_set.dim(), cfg.hidden, train_set.num_classes,
                                      cfg.activation, cfg.bias, seed);
    TrainConfig tc = cfg.baseline;
    tc.seed = seed;
    tc.reg = {};
    TrainResult tr = train(init, train_set, tc);
    BaselineRecord& b = result.baselines[i];
    b.seed = seed;
    b.train_acc = accuracy(tr.net, train_set);
    b.test_acc = accuracy(tr.net, test_set);
    b.trace = std::move(tr.trace);
    b.seconds = seconds_since(s0);
    baseline_nets[i] = std::move(tr.net);
  });

  const bool has_zero =
      std::find(cfg.lambdas.begin(), cfg.lambdas.end(), 0.0) != cfg.lambdas.end();
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (has_zero) tasks.push_back({cfg.seeds[i], i, RegularizerKind::none, 0.0});
    for (RegularizerKind k : cfg.kinds)
      for (double l : cfg.lambdas)
        if (l != 0.0) tasks.push_back({cfg.seeds[i], i, k, l});
  }

  std::vector<RunRecord> done(tasks.size());
  std::mutex progress_mutex;
  parallel_for(tasks.size(), cfg.jobs, [&](std::size_t t) {
    const Task& task = tasks[t];
    const auto s0 = Clock::now();
    RunRecord rec;
    rec.model_id = model_id(cfg, task.seed, task.kind, task.lambda);
    rec.seed = task.seed;
    rec.kind = task.kind;
    rec.lambda = task.lambda;
    TrainConfig fc = cfg.finetune;
    fc.seed = task.seed + kFinetuneSeedOffset;
    try {
      TrainResult ft =
          finetune(baseline_nets[task.seed_index], train_set, task.kind, task.lambda, fc);
      rec.final_objective = ft.trace.empty() ? kNaN : ft.trace.back().objective;
      rec.train_acc = accuracy(ft.net, train_set);
      rec.test_acc = accuracy(ft.net, test_set);
      for (const AttackConfig& ac : cfg.attacks)
        rec.attacks.push_back(evaluate(ft.net, eval_set, ac));
      for (std::size_t i = 0; i < cert_set.size(); ++i) {
        try {
          rec.certificate_rows.push_back(
              certify(ft.net, cert_set.input(i), cert_set.labels[i], cfg.cert_epsilon));
        } catch (const ConvergenceError&) {
          RobustnessCertificate c;
          c.reason = "power iteration did not converge";
          rec.certificate_rows.push_back(c);
        }
      }
      rec.certificates = summarize_certificates(rec.certificate_rows);
      if (!cfg.weights_dir.empty()) {
        const auto path = cfg.weights_dir / (rec.model_id + ".rrlnet");
        save_network(ft.net, path);
        rec.weights_checksum = hex64(file_checksum(path));
      }
    } catch (const DivergenceError& e) {
      rec.diverged = true;
      rec.divergence = e.what();
      rec.divergence_epoch = e.epoch() + 1;
      rec.train_acc = rec.test_acc = rec.final_objective = kNaN;
      rec.attacks.clear();
      rec.certificate_rows.clear();
      rec.certificates = {};
    }
    rec.seconds = seconds_since(s0);
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      progress(rec);
    }
    done[t] = std::move(rec);
  });

  // Order by (kind, lambda, seed); the shared lambda = 0 run appears under
  // every kind.
  for (RegularizerKind k : cfg.kinds) {
    for (double l : cfg.lambdas) {
      for (std::uint64_t seed : cfg.seeds) {
        for (const RunRecord& r : done) {
          if (r.seed != seed || r.lambda != l) continue;
          if (l == 0.0 && r.kind == RegularizerKind::none) {
            RunRecord copy = r;
            copy.kind = k;
            copy.shared = true;
            result.runs.push_back(std::move(copy));
          } else if (r.kind == k) {
            result.runs.push_back(r);
          }
        }
      }
    }
  }
  result.means = average_runs(cfg, result.runs);
  result.seconds = seconds_since(t0);
  return result;
}

}  // namespace rrl
