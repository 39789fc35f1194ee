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

#include "rrl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace rrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq_norm(const Vector& v) { return dot(v, v); }

// Smallest t > 0 with t a + t^2 c / 2 >= xi, for c >= 0.
double ray_root(double a, double c, double xi) {
  const double denom = a + std::sqrt(a * a + 2.0 * std::max(c, 0.0) * xi);
  return denom > 0.0 ? 2.0 * xi / denom : kInf;
}

Vector random_unit(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> gauss;
  Vector d(n);
  double nn = 0.0;
  while (nn == 0.0) {
    for (double& v : d) v = gauss(rng);
    nn = norm(d, Norm::l2);
  }
  d *= 1.0 / nn;
  return d;
}

}  // namespace

double relative_error(double analytic, double oracle, double floor) {
  if (analytic == oracle) return 0.0;  // covers matching infinities
  return std::abs(analytic - oracle) / std::max(std::abs(oracle), floor);
}

double relative_error(const Vector& analytic, const Vector& oracle, double floor) {
  if (analytic.size() != oracle.size()) throw DimensionError("relative_error: sizes differ");
  return norm(analytic - oracle, Norm::l2) / std::max(norm(oracle, Norm::l2), floor);
}

double relative_error(const Matrix& analytic, const Matrix& oracle, double floor) {
  if (analytic.rows() != oracle.rows() || analytic.cols() != oracle.cols())
    throw DimensionError("relative_error: shapes differ");
  Matrix d = analytic;
  d -= oracle;
  return frobenius(d) / std::max(frobenius(oracle), floor);
}

OracleReport make_report(std::string quantity, double analytic, double oracle, double tolerance,
                         double margin, double step) {
  OracleReport r;
  r.quantity = std::move(quantity);
  r.analytic = analytic;
  r.oracle = oracle;
  r.rel_error = relative_error(analytic, oracle);
  r.tolerance = tolerance;
  r.pass = r.rel_error <= tolerance;
  r.boundary_margin = margin;
  r.step = step;
  return r;
}

Vector fd_gradient(const ScalarField& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  Vector g(x.size());
  Vector xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Matrix fd_hessian(const ScalarField& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_hessian: step must be positive");
  const std::size_t n = x.size();
  Matrix hess(n, n);
  const double f0 = f(x);
  const double denom = 4.0 * h * h;
  Vector xp = x;
  for (std::size_t i = 0; i < n; ++i) {
    xp[i] = x[i] + 2.0 * h;
    const double fpp = f(xp);
    xp[i] = x[i] - 2.0 * h;
    const double fmm = f(xp);
    xp[i] = x[i];
    hess(i, i) = (fpp - 2.0 * f0 + fmm) / denom;
    for (std::size_t j = i + 1; j < n; ++j) {
      auto at = [&](double si, double sj) {
        xp[i] = x[i] + si * h;
        xp[j] = x[j] + sj * h;
        const double v = f(xp);
        xp[i] = x[i];
        xp[j] = x[j];
        return v;
      };
      const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / denom;
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

double ce_loss_naive(const Vector& z, std::size_t y) {
  if (y >= z.size()) throw std::out_of_range("ce_loss_naive: label out of range");
  double zmax = -kInf;
  for (double v : z) zmax = std::max(zmax, v);
  double s = 0.0;
  for (double v : z) s += std::exp(v - zmax);
  return zmax + std::log(s) - z[y];
}

namespace {

// Hidden preactivations recomputed with explicit loops.
std::vector<std::vector<double>> preactivations_naive(const Network& net, const Vector& x) {
  const double slope = net.activation().negative_slope();
  std::vector<double> a(x.begin(), x.end());
  std::vector<std::vector<double>> out;
  for (std::size_t j = 0; j + 1 < net.depth(); ++j) {
    const Matrix& w = net.weight(j);
    std::vector<double> h(w.cols(), 0.0);
    for (std::size_t c = 0; c < w.cols(); ++c) {
      double s = net.has_biases() ? net.bias(j)[c] : 0.0;
      for (std::size_t r = 0; r < w.rows(); ++r) s += w(r, c) * a[r];
      h[c] = s;
    }
    out.push_back(h);
    for (double& v : h) v = v > 0.0 ? v : slope * v;
    a = std::move(h);
  }
  return out;
}

}  // namespace

ActivationPattern pattern_naive(const Network& net, const Vector& x) {
  if (x.size() != net.input_dim()) throw DimensionError("pattern_naive: input width mismatch");
  const double slope = net.activation().negative_slope();
  ActivationPattern p;
  for (auto& h : preactivations_naive(net, x)) {
    for (double& v : h) v = v > 0.0 ? 1.0 : slope;
    p.multipliers.push_back(std::move(h));
  }
  return p;
}

Matrix local_map_by_product(const Network& net, const Vector& x) {
  const ActivationPattern p = pattern_naive(net, x);
  Matrix v = net.weight(0);
  for (std::size_t j = 1; j < net.depth(); ++j) {
    const auto& m = p.multipliers[j - 1];
    for (std::size_t r = 0; r < v.rows(); ++r)
      for (std::size_t c = 0; c < v.cols(); ++c) v(r, c) *= m[c];
    v = matmul(v, net.weight(j));
  }
  return v;
}

SymmetricSpectrum dense_eig_sym(const Matrix& a_in) {
  const std::size_t n = a_in.rows();
  if (a_in.cols() != n) throw DimensionError("dense_eig_sym: matrix not square");
  if (n > kMaxJacobiDim) throw std::length_error("dense_eig_sym: n > 64");
  if (asymmetry(a_in) > 1e-10) throw std::invalid_argument("dense_eig_sym: matrix not symmetric");
  Matrix a = a_in;
  Matrix q = Matrix::identity(n);
  const double scale = std::max(frobenius(a), std::numeric_limits<double>::min());
  SymmetricSpectrum out;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    out.sweeps = sweep;
    if (std::sqrt(off) <= 1e-12 * scale) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apr = a(p, r);
        if (apr == 0.0) continue;
        const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akr = a(k, r);
          a(k, p) = c * akp - s * akr;
          a(k, r) = s * akp + c * akr;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), ark = a(r, k);
          a(p, k) = c * apk - s * ark;
          a(r, k) = s * apk + c * ark;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double qkp = q(k, p), qkr = q(k, r);
          q(k, p) = c * qkp - s * qkr;
          q(k, r) = s * qkp + c * qkr;
        }
      }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  out.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values.push_back(a(order[c], order[c]));
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = q(r, order[c]);
  }
  return out;
}

namespace {

void check_quadratic_inputs(const Vector& g, const Matrix& h) {
  if (h.rows() != g.size() || h.cols() != g.size())
    throw DimensionError("quadratic model: H and grad disagree");
}

// l2 minimum via the trust-region characterization: the smallest radius rho
// whose ball contains a point with q(r) >= beta. On the sphere of radius rho
// the maximizer is r = (sigma I - H)^{-1} g with sigma >= lambda_max.
MinPerturbation min_pert_l2(const Vector& g, const Matrix& h, double xi, std::size_t restarts,
                            std::uint64_t seed) {
  const std::size_t n = g.size();
  const SymmetricSpectrum eig = dense_eig_sym(h);
  std::vector<double> lam(eig.values);
  for (double& l : lam) l = std::max(l, 0.0);  // PSD up to roundoff
  Vector gt = matvec_t(eig.vectors, g);
  const double lmax = lam.empty() ? 0.0 : lam.front();
  const double gnorm2 = sq_norm(g);
  const double lscale = std::max(lmax, 1.0);

  auto model_gain = [&](double sigma, Vector* r_out) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = gt[i] / (sigma - lam[i]);
      lin += gt[i] * ri;
      quad += lam[i] * ri * ri;
      if (r_out) (*r_out)[i] = ri;
    }
    return lin + 0.5 * quad;
  };

  MinPerturbation out;
  out.argmin = Vector(n);
  Vector rt(n);

  // Mass of g on the top eigenspace decides between the easy and hard case.
  double top_mass = 0.0;
  std::vector<bool> top(n, false);
  for (std::size_t i = 0; i < n; ++i)
    if (lam[i] >= lmax - 1e-12 * lscale) {
      top[i] = true;
      top_mass += gt[i] * gt[i];
    }

  bool hard = false;
  if (top_mass <= 1e-28 * std::max(gnorm2, 1.0) && lmax > 0.0) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (top[i]) continue;
      const double ri = gt[i] / (lmax - lam[i]);
      lin += gt[i] * ri;
      quad += lam[i] * ri * ri;
    }
    const double gain0 = lin + 0.5 * quad;
    if (gain0 < xi) {
      hard = true;
      double r0sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        rt[i] = top[i] ? 0.0 : gt[i] / (lmax - lam[i]);
        r0sq += rt[i] * rt[i];
      }
      const double tau = std::sqrt(2.0 * (xi - gain0) / lmax);
      for (std::size_t i = 0; i < n; ++i)
        if (top[i]) {
          rt[i] = tau;
          break;
        }
      out.radius = std::sqrt(r0sq + tau * tau);
    }
  }

  if (!hard) {
    if (gnorm2 == 0.0) {
      out.radius = kInf;  // g = 0 and H = 0: the model is flat
      out.confirmed = true;
      return out;
    }
    double lo = 0.0;
    double hi = std::max(1.0, 2.0 * gnorm2 / xi);
    while (model_gain(lmax + hi, nullptr) > xi) hi *= 2.0;
    for (int it = 0; it < 2000 && hi - lo > 1e-17 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if (model_gain(lmax + mid, nullptr) > xi)
        lo = mid;
      else
        hi = mid;
    }
    model_gain(lmax + hi, &rt);
    out.radius = norm(rt, Norm::l2);
  }
  out.argmin = matvec(eig.vectors, rt);

  // Confirmation: no direction reaches the threshold at a shorter distance.
  // Directions are drawn in the eigenbasis, where d^T H d is a weighted sum.
  std::mt19937_64 rng(seed);
  auto reach = [&](const Vector& d) {
    double a = 0.0, c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a += gt[i] * d[i];
      c += lam[i] * d[i] * d[i];
    }
    return ray_root(a, c, xi);
  };
  double best = kInf;
  std::normal_distribution<double> gauss;
  for (std::size_t k = 0; k < restarts; ++k) {
    Vector d = random_unit(rng, n);
    double t = reach(d);
    double step = 0.5;
    for (int it = 0; it < 60 && step > 1e-10; ++it) {
      Vector trial = d;
      for (double& v : trial) v += step * gauss(rng) / std::sqrt(static_cast<double>(n));
      trial *= 1.0 / norm(trial, Norm::l2);
      const double tt = reach(trial);
      if (tt < t) {
        d = std::move(trial);
        t = tt;
      } else {
        step *= 0.7;
      }
    }
    best = std::min(best, t);
  }
  out.best_search = best;
  out.directions = restarts;
  if (best < out.radius * (1.0 - 1e-9))
    throw ConvergenceError("min_pert_quadratic: search found a smaller perturbation than the "
                           "secular solution");
  out.confirmed = true;
  return out;
}

}  // namespace

MinPerturbation min_pert_quadratic(double loss, const Vector& g, const Matrix& h, double beta,
                                   Norm which, std::size_t restarts, std::uint64_t seed) {
  check_quadratic_inputs(g, h);
  const double xi = beta - loss;
  if (xi < 0.0) throw std::domain_error("min_pert_quadratic: loss already above threshold");
  MinPerturbation out;
  out.argmin = Vector(g.size());
  if (xi == 0.0) {
    out.confirmed = true;
    return out;
  }
  switch (which) {
    case Norm::l2:
      return min_pert_l2(g, h, xi, restarts, seed);
    case Norm::linf: {
      const std::size_t n = g.size();
      if (n > kMaxEnumerationDim) throw std::length_error("min_pert_quadratic: linf needs n <= 12");
      out.radius = kInf;
      Vector s(n);
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        for (std::size_t i = 0; i < n; ++i) s[i] = (mask >> i) & 1 ? -1.0 : 1.0;
        const double t = ray_root(dot(g, s), dot(s, matvec(h, s)), xi);
        if (t < out.radius) {
          out.radius = t;
          out.argmin = t * s;
        }
      }
      out.confirmed = true;
      out.best_search = out.radius;
      out.directions = std::size_t{1} << n;
      return out;
    }
    case Norm::l1:
      break;
  }
  throw std::invalid_argument("min_pert_quadratic: only l2 and linf are supported");
}

BoxMaximum max_loss_box(double loss, const Vector& g, const Matrix& h, double eps) {
  check_quadratic_inputs(g, h);
  if (eps < 0.0) throw std::invalid_argument("max_loss_box: eps must be non-negative");
  const std::size_t n = g.size();
  if (n > kMaxEnumerationDim) throw std::length_error("max_loss_box: exact mode needs n <= 12");
  BoxMaximum best{-kInf, Vector(n)};
  Vector r(n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t i = 0; i < n; ++i) r[i] = (mask >> i) & 1 ? -eps : eps;
    const double v = loss + dot(g, r) + 0.5 * dot(r, matvec(h, r));
    if (v > best.value) best = {v, r};
  }
  return best;
}

}  // namespace rrl
