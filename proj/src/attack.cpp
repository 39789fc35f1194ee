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

#include "rrl/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rrl/analytic.hpp"
#include "rrl/objective.hpp"

namespace rrl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void clip_to_domain(const Vector& x, Vector& r) {
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::clamp(x[i] + r[i], 0.0, 1.0) - x[i];
}

struct LossGrad {
  double loss;
  Vector grad;
};

LossGrad loss_and_grad(const Network& net, const Vector& x, std::size_t y) {
  const Matrix m(1, x.size(), x.values());
  const std::size_t labels[1] = {y};
  InputGradients g = loss_input_gradients(net, m, labels);
  return {g.losses[0], Vector(g.gradients.row(0))};
}

double loss_at(const Network& net, const Vector& x, std::size_t y) {
  return softmax_ce(logits(net, x), y).loss;
}

AttackResult finish(const Network& net, const Vector& x, std::size_t y, Vector r) {
  AttackResult res;
  res.set_perturbation(std::move(r));
  const Vector z = logits(net, x + res.perturbation);
  res.loss = softmax_ce(z, y).loss;
  res.success = decision_flipped(z, y);
  return res;
}

}  // namespace

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::fgsm: return "fgsm";
    case AttackKind::pgd: return "pgd";
    case AttackKind::deepfool: return "deepfool";
    case AttackKind::cw: return "cw";
  }
  return "?";
}

AttackKind parse_attack(std::string_view name) {
  for (AttackKind k : {AttackKind::fgsm, AttackKind::pgd, AttackKind::deepfool, AttackKind::cw})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown attack '" + std::string(name) +
                              "' (expected fgsm, pgd, deepfool or cw)");
}

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("attack epsilon must be finite and non-negative");
  if (pgd_steps < 1 || pgd_restarts < 1 || deepfool_max_iter < 1 || cw_steps < 1)
    throw std::invalid_argument("attack step counts must be at least 1");
  if (pgd_alpha < 0.0 || overshoot < 0.0 || cw_c < 0.0 || cw_step_size <= 0.0 ||
      cw_doublings < 0)
    throw std::invalid_argument("attack hyperparameters out of range");
}

std::string AttackConfig::describe() const {
  std::ostringstream s;
  s << "attack=" << to_string(kind);
  switch (kind) {
    case AttackKind::fgsm:
      s << " eps=" << epsilon;
      break;
    case AttackKind::pgd:
      s << " eps=" << epsilon << " alpha=" << alpha() << " steps=" << pgd_steps
        << " restarts=" << pgd_restarts;
      break;
    case AttackKind::deepfool:
      s << " overshoot=" << overshoot << " max_iter=" << deepfool_max_iter;
      break;
    case AttackKind::cw:
      s << " c=" << cw_c << " steps=" << cw_steps << " step_size=" << cw_step_size
        << " doublings=" << cw_doublings;
      break;
  }
  s << " clip=" << (clip ? "on" : "off");
  return s.str();
}

void AttackResult::set_perturbation(Vector r) {
  perturbation = std::move(r);
  l2 = norm(perturbation, Norm::l2);
  linf = norm(perturbation, Norm::linf);
}

bool decision_flipped(const Vector& z, std::size_t y) {
  double scale = 1.0;
  for (double v : z) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * scale;
  for (std::size_t k = 0; k < z.size(); ++k)
    if (k != y && z[k] >= z[y] - tol) return true;
  return false;
}

AttackResult fgsm(const Network& net, const Vector& x, std::size_t y, double eps, bool clip) {
  if (eps < 0.0) throw std::invalid_argument("fgsm: eps must be non-negative");
  const LossGrad lg = loss_and_grad(net, x, y);
  Vector r(x.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = eps * sign(lg.grad[i]);
  if (clip) clip_to_domain(x, r);
  AttackResult res = finish(net, x, y, std::move(r));
  res.iterations = 1;
  return res;
}

AttackResult pgd(const Network& net, const Vector& x, std::size_t y, double eps, double alpha,
                 int steps, int restarts, bool clip, std::uint64_t seed) {
  if (eps < 0.0 || alpha < 0.0) throw std::invalid_argument("pgd: eps and alpha must be >= 0");
  if (steps < 1 || restarts < 1) throw std::invalid_argument("pgd: steps and restarts >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-eps, eps);
  Vector best(x.size());
  double best_loss = -std::numeric_limits<double>::infinity();
  int used = 0;
  for (int rs = 0; rs < restarts; ++rs) {
    Vector r(x.size());
    if (rs > 0)
      for (double& v : r) v = unif(rng);
    if (clip) clip_to_domain(x, r);
    // The loss of each iterate comes with the gradient evaluated at it on
    // the next pass; only the last iterate needs a separate forward.
    for (int s = 0; s <= steps; ++s) {
      double l;
      LossGrad lg;
      if (s < steps) {
        lg = loss_and_grad(net, x + r, y);
        l = lg.loss;
      } else {
        l = loss_at(net, x + r, y);
      }
      if (s > 0 && l > best_loss) {
        best_loss = l;
        best = r;
      }
      if (s == steps) break;
      for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = std::clamp(r[i] + alpha * sign(lg.grad[i]), -eps, eps);
      if (clip) clip_to_domain(x, r);
      ++used;
    }
  }
  AttackResult res = finish(net, x, y, std::move(best));
  res.iterations = used;
  return res;
}

AttackResult deepfool(const Network& net, const Vector& x, std::size_t y, int max_iter,
                      double overshoot, bool clip) {
  if (max_iter < 1) throw std::invalid_argument("deepfool: max_iter must be >= 1");
  if (y >= net.num_classes()) throw std::out_of_range("deepfool: label out of range");
  Vector total(x.size());
  auto scaled = [&] {
    Vector r = (1.0 + overshoot) * total;
    if (clip) clip_to_domain(x, r);
    return r;
  };
  int it = 0;
  bool stuck = false;
  for (;;) {
    const Vector r = scaled();
    const Vector xt = x + r;
    const LocalLinearMap map = local_linear_map(net, xt);
    const Vector z = map.logits(xt);
    if (decision_flipped(z, y)) break;
    if (it == max_iter) break;
    // Nearest linearized boundary among the other classes.
    double best = std::numeric_limits<double>::infinity();
    Vector step;
    const Vector vy = map.column(y);
    for (std::size_t k = 0; k < map.num_classes(); ++k) {
      if (k == y) continue;
      const Vector w = map.column(k) - vy;
      const double wn = norm(w, Norm::l2);
      if (wn == 0.0) continue;
      const double f = std::abs(z[k] - z[y]);
      if (f / wn < best) {
        best = f / wn;
        step = (f / (wn * wn)) * w;
      }
    }
    if (step.empty()) {
      stuck = true;
      break;
    }
    total += step;
    ++it;
  }
  AttackResult res = finish(net, x, y, scaled());
  res.iterations = it;
  res.exhausted = !res.success && (it == max_iter || stuck);
  return res;
}

AttackResult cw_l2(const Network& net, const Vector& x, std::size_t y, double c, int steps,
                   double step_size, bool clip, int doublings) {
  if (c < 0.0 || steps < 1 || step_size <= 0.0 || doublings < 0)
    throw std::invalid_argument("cw_l2: invalid hyperparameters");
  if (decision_flipped(logits(net, x), y)) {
    AttackResult res = finish(net, x, y, Vector(x.size()));
    return res;
  }
  int used = 0;
  double c_cur = c;
  for (int attempt = 0; attempt <= doublings; ++attempt, c_cur *= 2.0) {
    Vector r(x.size());
    Vector best;
    double best_l2 = std::numeric_limits<double>::infinity();
    for (int s = 0; s < steps; ++s) {
      const Vector xt = x + r;
      const LocalLinearMap map = local_linear_map(net, xt);
      const Vector z = map.logits(xt);
      std::size_t j = y == 0 ? 1 : 0;
      for (std::size_t k = 0; k < z.size(); ++k)
        if (k != y && z[k] > z[j]) j = k;
      Vector g = 2.0 * r;
      if (z[y] - z[j] > 0.0) g += c_cur * (map.column(y) - map.column(j));
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= step_size * g[i];
      if (clip) clip_to_domain(x, r);
      ++used;
      if (decision_flipped(logits(net, x + r), y)) {
        const double l2 = norm(r, Norm::l2);
        if (l2 < best_l2) {
          best_l2 = l2;
          best = r;
        }
      }
    }
    if (!best.empty()) {
      AttackResult res = finish(net, x, y, std::move(best));
      res.iterations = used;
      return res;
    }
    if (c == 0.0) break;
  }
  AttackResult res = finish(net, x, y, Vector(x.size()));
  res.success = false;
  res.iterations = used;
  res.exhausted = true;
  return res;
}

AttackResult run_attack(const Network& net, const Vector& x, std::size_t y,
                        const AttackConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case AttackKind::fgsm:
      return fgsm(net, x, y, cfg.epsilon, cfg.clip);
    case AttackKind::pgd:
      return pgd(net, x, y, cfg.epsilon, cfg.alpha(), cfg.pgd_steps, cfg.pgd_restarts, cfg.clip,
                 cfg.seed);
    case AttackKind::deepfool:
      return deepfool(net, x, y, cfg.deepfool_max_iter, cfg.overshoot, cfg.clip);
    case AttackKind::cw:
      return cw_l2(net, x, y, cfg.cw_c, cfg.cw_steps, cfg.cw_step_size, cfg.clip,
                   cfg.cw_doublings);
  }
  throw std::invalid_argument("run_attack: unknown kind");
}

AttackMetrics aggregate_rows(const AttackConfig& cfg, std::vector<AttackSampleRow> rows) {
  AttackMetrics m;
  m.config = cfg;
  m.n_samples = rows.size();
  if (rows.empty()) throw std::invalid_argument("evaluate: empty dataset");
  std::size_t clean = 0, robust = 0;
  std::vector<double> norms;
  for (const auto& row : rows) {
    if (!row.clean_correct) continue;
    ++clean;
    if (!row.result.success) ++robust;
    if (row.result.success) {
      ++m.n_success;
      norms.push_back(row.result.l2);
    }
  }
  const double n = static_cast<double>(rows.size());
  m.clean_acc = clean / n;
  const bool bounded = cfg.kind == AttackKind::fgsm || cfg.kind == AttackKind::pgd;
  m.robust_acc = bounded ? robust / n : kNaN;
  m.mean_min_l2 = m.median_min_l2 = kNaN;
  if (!bounded && !norms.empty()) {
    double s = 0.0;
    for (double v : norms) s += v;
    m.mean_min_l2 = s / static_cast<double>(norms.size());
    std::sort(norms.begin(), norms.end());
    const std::size_t h = norms.size() / 2;
    m.median_min_l2 = norms.size() % 2 ? norms[h] : 0.5 * (norms[h - 1] + norms[h]);
  }
  m.rows = std::move(rows);
  return m;
}

AttackMetrics evaluate(const Network& net, const Dataset& data, const AttackConfig& cfg,
                       bool keep_rows) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  std::vector<AttackSampleRow> rows;
  rows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    AttackSampleRow row;
    row.sample_id = i;
    row.label = data.labels[i];
    const Vector x = data.input(i);
    row.clean_correct = predict(net, x) == row.label;
    if (row.clean_correct) {
      AttackConfig c = cfg;
      c.seed = cfg.seed + i;
      row.result = run_attack(net, x, row.label, c);
    } else {
      row.result.perturbation = Vector(x.size());
      row.result.success = true;
    }
    rows.push_back(std::move(row));
  }
  AttackMetrics m = aggregate_rows(cfg, std::move(rows));
  if (!keep_rows) m.rows.clear();
  return m;
}

}  // namespace rrl
