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

#include "rrl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace rrl {

FeatureProblem random_feature_problem(std::size_t n_samples, std::size_t input_dim,
                                      std::size_t n_features, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::bernoulli_distribution flip(0.15);
  Matrix w(input_dim, n_features);
  for (double& v : w.flat()) v = gauss(rng) * std::sqrt(2.0 / static_cast<double>(input_dim));
  Vector teacher(input_dim);
  for (double& v : teacher) v = gauss(rng);
  FeatureProblem p;
  p.features = Matrix(n_samples, n_features);
  Vector x(input_dim);
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (double& v : x) v = gauss(rng);
    const Vector h = matvec_t(w, x);
    for (std::size_t j = 0; j < n_features; ++j) p.features(i, j) = std::max(h[j], 0.0);
    bool positive = dot(teacher, x) > 0.0;
    if (flip(rng)) positive = !positive;
    p.labels.push_back(positive ? 0 : 1);
  }
  return p;
}

namespace {

enum class Penalty { half_nu_sq, mu_sq };

struct Evaluation {
  double ce = 0.0;
  double objective = 0.0;
  Vector grad;   // (v+, v-) stacked
  Matrix hess;   // 2m x 2m
};

// theta = (v+, v-), each of length m.
Evaluation evaluate_final_layer(const Matrix& phi, const std::vector<std::size_t>& labels,
                                const Vector& theta, Penalty pen, double lambda, bool want_hess) {
  const std::size_t n = phi.rows(), m = phi.cols();
  Evaluation e;
  e.grad = Vector(2 * m);
  if (want_hess) e.hess = Matrix(2 * m, 2 * m);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = phi.row(i);
    double zp = 0.0, zm = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      zp += theta[j] * f[j];
      zm += theta[m + j] * f[j];
    }
    // margin toward the true class; loss = log(1 + exp(-margin))
    const double margin = labels[i] == 0 ? zp - zm : zm - zp;
    const double loss = margin > 0.0 ? std::log1p(std::exp(-margin))
                                     : -margin + std::log1p(std::exp(margin));
    e.ce += loss * inv_n;
    const double q = 1.0 / (1.0 + std::exp(margin));  // 1 - p_y
    const double sgn = labels[i] == 0 ? 1.0 : -1.0;   // d margin / d zp
    for (std::size_t j = 0; j < m; ++j) {
      e.grad[j] += -q * sgn * f[j] * inv_n;
      e.grad[m + j] += q * sgn * f[j] * inv_n;
    }
    if (want_hess) {
      const double s = q * (1.0 - q) * inv_n;
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
          const double h = s * f[a] * f[b];
          e.hess(a, b) += h;
          e.hess(m + a, m + b) += h;
          e.hess(a, m + b) -= h;
          e.hess(m + a, b) -= h;
        }
    }
  }
  double pen_value = 0.0;
  if (pen == Penalty::half_nu_sq) {
    for (std::size_t j = 0; j < m; ++j) {
      const double w = theta[j] - theta[m + j];
      pen_value += 0.5 * lambda * w * w;
      e.grad[j] += lambda * w;
      e.grad[m + j] -= lambda * w;
      if (want_hess) {
        e.hess(j, j) += lambda;
        e.hess(m + j, m + j) += lambda;
        e.hess(j, m + j) -= lambda;
        e.hess(m + j, j) -= lambda;
      }
    }
  } else {
    for (std::size_t j = 0; j < 2 * m; ++j) {
      pen_value += lambda * theta[j] * theta[j];
      e.grad[j] += 2.0 * lambda * theta[j];
      if (want_hess) e.hess(j, j) += 2.0 * lambda;
    }
  }
  e.objective = e.ce + pen_value;
  return e;
}

// Solves (A + shift I) x = b by Cholesky; false if not positive definite.
bool cholesky_solve(Matrix a, double shift, const Vector& b, Vector& x) {
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) a(i, i) += shift;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / d;
    }
  }
  x = b;
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * x[k];
    x[i] = s / a(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a(k, i) * x[k];
    x[i] = s / a(i, i);
  }
  return true;
}

FinalLayerFit fit_final_layer(const Matrix& phi, const std::vector<std::size_t>& labels,
                              Penalty pen, double lambda, double tol, int max_iter) {
  const std::size_t m = phi.cols();
  Vector theta(2 * m);
  FinalLayerFit fit;
  Evaluation e = evaluate_final_layer(phi, labels, theta, pen, lambda, true);
  int it = 0;
  for (; it < max_iter; ++it) {
    if (norm(e.grad, Norm::l2) <= tol) break;
    double diag = 0.0;
    for (std::size_t i = 0; i < 2 * m; ++i) diag = std::max(diag, e.hess(i, i));
    // The nu^2 objective is flat along v+ = v-; a tiny shift keeps the solve
    // well posed without leaving the gradient's subspace.
    double shift = 1e-12 * std::max(diag, 1.0);
    Vector step;
    const Vector rhs = -1.0 * e.grad;
    while (!cholesky_solve(e.hess, shift, rhs, step)) shift *= 10.0;
    // Backtracking on the objective.
    double t = 1.0;
    const double slope = dot(e.grad, step);
    Evaluation next;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      next = evaluate_final_layer(phi, labels, theta + t * step, pen, lambda, false);
      if (next.objective <= e.objective + 1e-4 * t * slope) break;
    }
    theta += t * step;
    e = evaluate_final_layer(phi, labels, theta, pen, lambda, true);
  }
  fit.iterations = it;
  fit.grad_norm = norm(e.grad, Norm::l2);
  fit.converged = fit.grad_norm <= tol;
  fit.ce = e.ce;
  fit.objective = e.objective;
  fit.v = Matrix(m, 2);
  double nu2 = 0.0, mu2 = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    fit.v(j, 0) = theta[j];
    fit.v(j, 1) = theta[m + j];
    const double w = theta[j] - theta[m + j];
    nu2 += w * w;
    mu2 += theta[j] * theta[j] + theta[m + j] * theta[m + j];
  }
  fit.nu = std::sqrt(nu2);
  fit.mu = std::sqrt(mu2);
  return fit;
}

}  // namespace

EquivalenceRecord final_layer_equivalence(const Matrix& features,
                                          const std::vector<std::size_t>& labels, double lambda,
                                          double tol, int max_iter) {
  if (features.rows() != labels.size())
    throw DimensionError("final_layer_equivalence: rows != labels");
  if (lambda < 0.0)
    throw std::invalid_argument("final_layer_equivalence: lambda must be non-negative");
  for (std::size_t y : labels)
    if (y > 1) throw std::invalid_argument("final_layer_equivalence: labels must be binary");
  EquivalenceRecord r;
  r.lambda = lambda;
  r.cross_lipschitz = fit_final_layer(features, labels, Penalty::half_nu_sq, lambda, tol, max_iter);
  r.lipschitz = fit_final_layer(features, labels, Penalty::mu_sq, lambda, tol, max_iter);
  const Matrix& v = r.lipschitz.v;
  double s2 = 0.0, d2 = 0.0;
  for (std::size_t j = 0; j < v.rows(); ++j) {
    s2 += (v(j, 0) + v(j, 1)) * (v(j, 0) + v(j, 1));
    d2 += (v(j, 0) - v(j, 1)) * (v(j, 0) - v(j, 1));
  }
  r.sum_norm = std::sqrt(s2);
  r.diff_norm = std::sqrt(d2);
  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
  };
  r.nu_rel_gap = rel(r.cross_lipschitz.nu, r.lipschitz.nu);
  r.ce_rel_gap = rel(r.cross_lipschitz.ce, r.lipschitz.ce);
  r.objective_gap = std::abs(r.cross_lipschitz.objective - r.lipschitz.objective);
  return r;
}

GaussHermite gauss_hermite(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_hermite: n must be positive");
  constexpr double kPim4 = 0.7511255444649425;  // pi^(-1/4)
  GaussHermite gh;
  gh.nodes.assign(n, 0.0);
  gh.weights.assign(n, 0.0);
  const double nd = static_cast<double>(n);
  double z = 0.0;
  for (std::size_t i = 1; i <= (n + 1) / 2; ++i) {
    if (i == 1)
      z = std::sqrt(2.0 * nd + 1.0) - 1.85575 * std::pow(2.0 * nd + 1.0, -0.16667);
    else if (i == 2)
      z -= 1.14 * std::pow(nd, 0.426) / z;
    else if (i == 3)
      z = 1.86 * z - 0.86 * gh.nodes[0];
    else if (i == 4)
      z = 1.91 * z - 0.91 * gh.nodes[1];
    else
      z = 2.0 * z - gh.nodes[i - 3];
    double pp = 0.0;
    for (int its = 0; its < 100; ++its) {
      double p1 = kPim4, p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jd = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / jd) * p2 - std::sqrt((jd - 1.0) / jd) * p3;
      }
      pp = std::sqrt(2.0 * nd) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    gh.nodes[i - 1] = z;
    gh.nodes[n - i] = -z;
    gh.weights[i - 1] = 2.0 / (pp * pp);
    gh.weights[n - i] = gh.weights[i - 1];
  }
  return gh;
}

Vector population_ce_gradient(const Vector& w, double eta) {
  static const GaussHermite gh = gauss_hermite(80);
  // t = y w^T x ~ N(c, ||w||^2) with c = eta * sum_{j >= 2} w_j.
  double c = 0.0;
  for (std::size_t j = 1; j < w.size(); ++j) c += eta * w[j];
  const double s = norm(w, Norm::l2);
  double e_sig_neg = 0.0, e_sig_prod = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    const double t = c + std::numbers::sqrt2 * s * gh.nodes[i];
    const double sp = 1.0 / (1.0 + std::exp(-t));
    const double sn = 1.0 - sp;
    e_sig_neg += gh.weights[i] * sn;
    e_sig_prod += gh.weights[i] * sp * sn;
  }
  e_sig_neg /= std::sqrt(std::numbers::pi);
  e_sig_prod /= std::sqrt(std::numbers::pi);
  // E[-y sigma(-y w^T x) x] = -eta m E[sigma(-t)] + w E[sigma(t) sigma(-t)] (Stein).
  Vector g = e_sig_prod * w;
  for (std::size_t j = 1; j < w.size(); ++j) g[j] -= eta * e_sig_neg;
  return g;
}

GradientFlowRecord gradient_flow_experiment(std::size_t dim, double a, double eta, double lambda,
                                            double step, int steps, FlowInit init,
                                            std::uint64_t seed) {
  if (dim < 2) throw DimensionError("gradient flow: dim must be at least 2");
  GradientFlowRecord rec;
  rec.dim = dim;
  rec.a = a;
  rec.eta = eta;
  rec.lambda = lambda;
  rec.step = step;
  rec.steps = steps;
  Matrix v0(dim, 2);
  if (init == FlowInit::bayes) {
    for (std::size_t j = 1; j < dim; ++j) {
      v0(j, 0) = a;
      v0(j, 1) = -a;
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, a);
    for (double& v : v0.flat()) v = gauss(rng);
  }
  Matrix va = v0, vb = v0;
  auto diff = [&](const Matrix& v) {
    Vector w(dim);
    for (std::size_t j = 0; j < dim; ++j) w[j] = v(j, 0) - v(j, 1);
    return w;
  };
  for (int t = 0; t < steps; ++t) {
    const Vector wa = diff(va), wb = diff(vb);
    const Vector ga = population_ce_gradient(wa, eta);
    const Vector gb = population_ce_gradient(wb, eta);
    for (std::size_t j = 0; j < dim; ++j) {
      // lambda nu^2 / 2
      va(j, 0) -= step * (ga[j] + lambda * wa[j]);
      va(j, 1) -= step * (-ga[j] - lambda * wa[j]);
      // lambda mu^2
      const double p = vb(j, 0), m = vb(j, 1);
      vb(j, 0) -= step * (gb[j] + 2.0 * lambda * p);
      vb(j, 1) -= step * (-gb[j] + 2.0 * lambda * m);
    }
    Matrix d = va;
    d -= vb;
    const double dv = frobenius(d);
    rec.max_divergence = std::max(rec.max_divergence, dv);
    rec.final_divergence = dv;
  }
  rec.v_cross_lipschitz = va;
  rec.v_lipschitz = vb;
  return rec;
}

}  // namespace rrl
