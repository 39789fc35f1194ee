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


#include "rrl/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "rrl/analytic.hpp"
#include "rrl/certify.hpp"
#include "rrl/network.hpp"

namespace rrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kGradStep = 1e-4;
constexpr double kHessStep = 1e-3;
// Rounding slack for the fuzzed inequalities (equality cases are generated on purpose).
constexpr double kIneqSlack = 1e-12;
constexpr int kMaxDraws = 50;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Network random_net(std::mt19937_64& rng, std::size_t input_dim, std::size_t depth,
                   std::size_t classes, std::size_t max_width = 64) {
  std::uniform_int_distribution<std::size_t> width(4, max_width);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::size_t> widths{input_dim};
  for (std::size_t j = 1; j < depth; ++j) widths.push_back(width(rng));
  widths.push_back(classes);
  const Activation act = coin(rng)
                             ? Activation::relu()
                             : Activation::leaky(std::uniform_real_distribution<>(0.01, 0.3)(rng));
  const bool bias = coin(rng);
  Network net = Network::random(widths, act, bias, rng);
  if (bias) {
    std::normal_distribution<double> n(0.0, 0.1);
    for (std::size_t j = 0; j < net.depth(); ++j)
      for (double& b : net.bias(j)) b = n(rng);
  }
  return net;
}

Vector gaussian(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (double& e : v) e = g(rng);
  return v;
}

// Mutated l2 radius: "+ 1" where the formula has "- 1".
double r2_with_fault(double p, double q, double nu, double xi, Fault fault) {
  if (fault != Fault::r2_sign) return r2_analytic(p, q, nu, xi);
  return (std::sqrt(1.0 + 2.0 * p * xi / q) + 1.0) / (p * nu);
}

OracleReport count_report(std::string quantity, std::size_t violations, double worst_excess,
                          double tolerance) {
  OracleReport r;
  r.quantity = std::move(quantity);
  r.analytic = static_cast<double>(violations);
  r.oracle = 0.0;
  r.rel_error = worst_excess;
  r.tolerance = tolerance;
  r.pass = violations == 0 && worst_excess <= tolerance;
  r.boundary_margin = kNaN;
  return r;
}

/// a <= b up to relative rounding slack; returns the relative excess (<= 0 when it holds).
double excess(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return (a - b) / scale;
}

std::size_t count_k2(std::size_t n, std::size_t period) {
  return n == 0 ? 0 : (n - 1) / period + 1;
}

}  // namespace

std::string to_string(Fault f) {
  switch (f) {
    case Fault::none: return "none";
    case Fault::r2_sign: return "r2-sign";
    case Fault::grad_sign: return "grad-sign";
    case Fault::hessian_scale: return "hessian-scale";
    case Fault::mc_unscaled: return "mc-unscaled";
    case Fault::chain_bound: return "chain-bound";
  }
  return "none";
}

Fault parse_fault(std::string_view name) {
  for (Fault f : all_faults())
    if (to_string(f) == name) return f;
  throw std::invalid_argument("unknown fault '" + std::string(name) + "'");
}

const std::vector<Fault>& all_faults() {
  static const std::vector<Fault> faults{Fault::none,          Fault::r2_sign,
                                         Fault::grad_sign,     Fault::hessian_scale,
                                         Fault::mc_unscaled,   Fault::chain_bound};
  return faults;
}

std::size_t SuiteResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const OracleReport& r) { return !r.pass; }));
}

bool VerifyResult::pass() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.pass(); });
}

std::size_t VerifyResult::row_count() const {
  std::size_t n = 0;
  for (const auto& s : suites) n += s.rows.size();
  return n;
}

std::size_t VerifyResult::failures() const {
  std::size_t n = 0;
  for (const auto& s : suites) n += s.failures();
  return n;
}

// ---------------------------------------------------------------------------
// Closed forms: gradient / Hessian against finite differences, local map
// against explicit products, power iteration against Jacobi.

SuiteResult verify_closed_forms(const VerifyOptions& opt) {
  const auto t0 = Clock::now();
  SuiteResult res;
  res.name = "closed-forms";
  std::mt19937_64 rng(opt.seed);
  const std::size_t class_cycle[] = {2, 3, 10};

  for (std::size_t i = 0; i < opt.networks; ++i) {
    const std::size_t k = class_cycle[i % 3];
    const std::size_t depth = 2 + (i / 3) % 3;
    std::uniform_int_distribution<std::size_t> dim(2, 24);
    std::uniform_int_distribution<std::size_t> label(0, k - 1);

    Network net;
    Vector x, fd_g;
    Matrix fd_h;
    std::size_t y = 0;
    double margin = 0.0;
    for (bool accepted = false; !accepted;) {
      net = random_net(rng, dim(rng), depth, k);
      y = label(rng);
      for (int draw = 0; draw < kMaxDraws && !accepted; ++draw) {
        x = gaussian(rng, net.input_dim());
        margin = boundary_margin(net, x);
        if (margin <= std::max(opt.margin_guard, 10.0 * kHessStep * norm(x, Norm::linf))) {
          ++res.rejected_fixtures;
          continue;
        }
        const ActivationPattern base = pattern_naive(net, x);
        bool flipped = false;
        const ScalarField loss = [&](const Vector& xp) {
          if (pattern_naive(net, xp) != base) flipped = true;
          return ce_loss_naive(logits(net, xp), y);
        };
        fd_g = fd_gradient(loss, x, kGradStep);
        fd_h = fd_hessian(loss, x, kHessStep);
        if (flipped) {
          ++res.rejected_fixtures;
          continue;
        }
        accepted = true;
      }
    }

    const LocalLinearMap map = local_linear_map(net, x);
    const PredictionRecord rec = softmax_ce(logits(net, x), y);
    const InputForms forms = k == 2 ? binary_forms(map, rec) : multiclass_forms(map, rec);
    const std::string tag = "[net " + std::to_string(i) + ", K=" + std::to_string(k) + "]";

    Vector grad = forms.gradient;
    if (opt.fault == Fault::grad_sign) grad *= -1.0;
    Matrix hess = forms.hessian.materialize();
    if (opt.fault == Fault::hessian_scale) hess *= 2.0;

    OracleReport rg = make_report("grad_vs_fd " + tag, norm(grad, Norm::l2),
                                  norm(fd_g, Norm::l2), 1e-4, margin, kGradStep);
    rg.rel_error = relative_error(grad, fd_g);
    rg.pass = rg.rel_error <= rg.tolerance;
    res.rows.push_back(rg);

    OracleReport rh = make_report("hessian_vs_fd " + tag, frobenius(hess), frobenius(fd_h), 1e-3,
                                  margin, kHessStep);
    rh.rel_error = relative_error(hess, fd_h);
    rh.pass = rh.rel_error <= rh.tolerance;
    res.rows.push_back(rh);

    const Matrix v_prod = local_map_by_product(net, x);
    OracleReport rv = make_report("local_map_vs_product " + tag, frobenius(map.v),
                                  frobenius(v_prod), 1e-10, margin);
    rv.rel_error = relative_error(map.v, v_prod);
    rv.pass = rv.rel_error <= rv.tolerance;
    res.rows.push_back(rv);

    const ActivationPattern pat = activation_pattern(net, x);
    const ActivationPattern naive = pattern_naive(net, x);
    std::size_t mismatches = 0;
    for (std::size_t j = 0; j < naive.multipliers.size(); ++j)
      for (std::size_t u = 0; u < naive.multipliers[j].size(); ++u)
        mismatches += pat.multipliers.at(j).at(u) != naive.multipliers[j][u];
    res.rows.push_back(count_report("pattern_vs_sign_test " + tag, mismatches, 0.0, 0.0));

    // Power iteration through the factors vs. a dense Jacobi solve.
    const FactoredHessian mc = FactoredHessian::multiclass(map.v, rec.probs);
    const double top_power = mc.top_eigenpair().value;
    const double top_jacobi = dense_eig_sym(mc.materialize()).values.front();
    res.rows.push_back(
        make_report("power_vs_jacobi " + tag, top_power, top_jacobi, 1e-8, margin));

    if (k == 2) {
      const double nu = cross_lipschitz(map);
      res.rows.push_back(make_report("grad_norm_identity " + tag, norm(grad, Norm::l2),
                                     rec.one_minus_py * nu, 1e-10, margin));
      const EigenPair top = mc.top_eigenpair();
      const double s = rec.p_y() * rec.one_minus_py;
      const double h_norm = opt.fault == Fault::hessian_scale ? 2.0 * top.value : top.value;
      res.rows.push_back(
          make_report("hessian_norm_identity " + tag, h_norm, s * nu * nu, 1e-10, margin));
      const double gn = norm(grad, Norm::l2);
      const double cosine = gn > 0.0 ? std::abs(dot(grad, top.vector)) / gn : 1.0;
      OracleReport ra = make_report("grad_top_eigvec_alignment " + tag, cosine, 1.0, 1e-8, margin);
      ra.rel_error = 1.0 - cosine;
      ra.pass = ra.rel_error <= ra.tolerance;
      res.rows.push_back(ra);
    } else {
      Matrix pairwise(map.input_dim(), map.input_dim());
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
          const Vector d = map.column(a) - map.column(b);
          Matrix o = outer(d, d);
          o *= rec.probs[a] * rec.probs[b];
          pairwise += o;
        }
      OracleReport rp = make_report("hessian_vs_pairwise_sum " + tag, frobenius(hess),
                                    frobenius(pairwise), 1e-10, margin);
      rp.rel_error = relative_error(hess, pairwise);
      rp.pass = rp.rel_error <= rp.tolerance;
      res.rows.push_back(rp);
    }
  }
  res.seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------
// Binary certificates: Taylor bounds collapse onto the analytic radius, and the
// analytic radii / worst-case loss match direct search and vertex enumeration.

SuiteResult verify_certificates(const VerifyOptions& opt) {
  const auto t0 = Clock::now();
  SuiteResult res;
  res.name = "certificates";
  std::mt19937_64 rng(opt.seed ^ 0xce47ULL);
  std::uniform_int_distribution<std::size_t> dim(2, kMaxEnumerationDim);
  std::uniform_int_distribution<std::size_t> depth(1, 3);
  std::uniform_real_distribution<double> eps_dist(0.01, 0.5);

  for (std::size_t i = 0; i < opt.binary_fixtures; ++i) {
    Network net;
    Vector x;
    double eps = 0.1;
    if (i == 0) {
      // Linear reference: v+ = (1, 0), v- = (-1, 0), x = (0.5, 0).
      net = Network({Matrix{{1.0, -1.0}, {0.0, 0.0}}}, {}, Activation::relu());
      x = Vector{0.5, 0.0};
    } else if (i == 1) {
      // Same logits with v+ - v- = (1, 1).
      net = Network({Matrix{{0.5, -0.5}, {0.5, -0.5}}}, {}, Activation::relu());
      x = Vector{0.5, 0.5};
    } else {
      do {
        net = random_net(rng, dim(rng), depth(rng), 2, 32);
        x = gaussian(rng, net.input_dim());
      } while (cross_lipschitz(local_linear_map(net, x)) == 0.0 && ++res.rejected_fixtures);
      eps = eps_dist(rng);
    }
    const LocalLinearMap map = local_linear_map(net, x);
    const Vector z = logits(net, x);
    const std::size_t y = argmax(z);
    const PredictionRecord rec = softmax_ce(z, y);
    const double margin = boundary_margin(net, x);
    const std::string tag = "[fixture " + std::to_string(i) + "]";

    const double p = rec.p_y(), q = rec.one_minus_py, xi = rec.slack;
    const double nu = cross_lipschitz(map);
    const ColumnDifferenceNorms wn = w_norms(map);
    const double r2 = r2_with_fault(p, q, nu, xi, opt.fault);
    const double rinf = rinf_analytic(p, q, wn.l1, xi);

    // Multi-class factorization at K = 2: power iteration supplies u.
    const InputForms f = multiclass_forms(map, rec);
    const TaylorRadiusBounds tb = taylor_radius_bounds(f.gradient, f.hessian, xi);
    res.rows.push_back(make_report("taylor_lower_vs_r2 " + tag, tb.lower, r2, 1e-8, margin));
    res.rows.push_back(make_report("taylor_upper_vs_r2 " + tag, tb.upper, r2, 1e-8, margin));

    const Matrix h = f.hessian.materialize();
    const std::uint64_t search_seed = opt.seed + i;
    auto search = [&](Norm nrm) {
      try {
        return min_pert_quadratic(rec.loss, f.gradient, h, std::log(2.0), nrm, opt.restarts,
                                  search_seed)
            .radius;
      } catch (const ConvergenceError&) {
        return kNaN;  // the search beat its own minimum: reported as a failure
      }
    };
    res.rows.push_back(make_report("r2_vs_min_search " + tag, r2, search(Norm::l2), 1e-6, margin));
    res.rows.push_back(
        make_report("rinf_vs_vertex_min " + tag, rinf, search(Norm::linf), 1e-6, margin));

    const BoxMaximum box = max_loss_box(rec.loss, f.gradient, h, eps);
    res.rows.push_back(make_report("eta_star_vs_box_max " + tag,
                                   worst_case_loss(rec.loss, eps, p, wn.l1), box.value, 1e-9,
                                   margin));
    double worst = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double gc = f.gradient[c];
      if (gc == 0.0) continue;  // the loss does not depend on this coordinate
      const double expect = gc > 0.0 ? eps : -eps;
      worst = std::max(worst, std::abs(box.maximizer[c] - expect) / eps);
    }
    OracleReport rm = make_report("box_maximizer_is_eps_sign_grad " + tag, 0.0, 0.0, 1e-12, margin);
    rm.rel_error = worst;
    rm.pass = worst <= rm.tolerance;
    res.rows.push_back(rm);
  }
  res.seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------
// Multi-class lower bounds never exceed the true minimal perturbation of the
// quadratic model (nor the exact binary radius at K = 2).

SuiteResult verify_multiclass_bounds(const VerifyOptions& opt) {
  const auto t0 = Clock::now();
  SuiteResult res;
  res.name = "multiclass-bounds";
  std::mt19937_64 rng(opt.seed ^ 0x3c1a55ULL);
  std::uniform_int_distribution<std::size_t> dim(2, kMaxEnumerationDim);
  std::uniform_int_distribution<std::size_t> depth(1, 3);

  for (std::size_t i = 0; i < opt.multiclass_fixtures; ++i) {
    const std::size_t k = 2 + i % 9;
    Network net;
    Vector x;
    LocalLinearMap map;
    // All-dead regions give V = 0: no finite radius to compare, redraw.
    for (;;) {
      net = random_net(rng, dim(rng), depth(rng), k, 32);
      x = gaussian(rng, net.input_dim());
      map = local_linear_map(net, x);
      if (cross_lipschitz_multiclass_sq(map.v) > 0.0) break;
      ++res.rejected_fixtures;
    }
    const Vector z = logits(net, x);
    const std::size_t y = argmax(z);
    const PredictionRecord rec = softmax_ce(z, y);
    const std::string tag = "[fixture " + std::to_string(i) + ", K=" + std::to_string(k) + "]";

    const double kk = static_cast<double>(k);
    double nu_mc = std::sqrt(cross_lipschitz_multiclass_sq(map.v));
    if (opt.fault == Fault::mc_unscaled) nu_mc *= std::sqrt((kk - 1.0) / kk);
    const double mu = lipschitz(map);
    const MulticlassLowerBounds b = mc_lower_bounds(rec.p_y(), nu_mc, mu, rec.slack, k);

    const InputForms f = multiclass_forms(map, rec);
    double oracle = kNaN;
    try {
      oracle = min_pert_quadratic(rec.loss, f.gradient, f.hessian.materialize(), std::log(kk),
                                  Norm::l2, opt.restarts, opt.seed + i)
                   .radius;
    } catch (const ConvergenceError&) {
    }
    auto bound_row = [&](std::string name, double bound, double reference) {
      OracleReport r =
          make_report(std::move(name), bound, reference, 1e-9, boundary_margin(net, x));
      const double ex = excess(bound, reference);
      r.rel_error = std::isnan(reference) ? kInf : std::max(0.0, ex);
      r.pass = r.rel_error <= r.tolerance;
      return r;
    };
    res.rows.push_back(bound_row("mc_bound_le_min_search " + tag, b.best, oracle));
    if (k == 2) {
      const double r2 =
          r2_with_fault(rec.p_y(), rec.one_minus_py, cross_lipschitz(map), rec.slack, opt.fault);
      res.rows.push_back(bound_row("mc_bound_le_r2 " + tag, b.best, r2));
    }
  }
  res.seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------
// Fuzzed inequalities and monotonicity of the analytic radius.

SuiteResult verify_inequalities(const VerifyOptions& opt) {
  const auto t0 = Clock::now();
  SuiteResult res;
  res.name = "inequalities";
  std::mt19937_64 rng(opt.seed ^ 0x1e9ULL);
  std::uniform_int_distribution<std::size_t> dim(1, 16);
  std::uniform_real_distribution<double> log_scale(-2.0, 1.0);
  std::uniform_int_distribution<int> shape(0, 3);
  std::normal_distribution<double> logit(0.0, 3.0);

  std::size_t v_lo = 0, v_hi = 0, v_grad = 0, v_hess = 0;
  double w_lo = -kInf, w_hi = -kInf, w_grad = -kInf, w_hess = -kInf;
  const double chain_factor = opt.fault == Fault::chain_bound ? 0.25 : 0.5;
  for (std::size_t i = 0; i < opt.fuzz; ++i) {
    const std::size_t n = dim(rng);
    const double s = std::pow(10.0, log_scale(rng));
    const Vector vp = gaussian(rng, n, s);
    Vector vm = gaussian(rng, n, s);
    Vector zz{logit(rng), logit(rng)};
    switch (shape(rng)) {
      case 0: vm = -1.0 * vp; break;      // nu^2 / 2 == mu^2
      case 1: zz[1] = zz[0]; break;       // p_y = 1/2: the two chain terms meet
      case 2: vm = vp + gaussian(rng, n, 1e-6 * s); break;  // nearly equal columns
      default: break;
    }
    LocalLinearMap map;
    map.v = Matrix::from_columns({vp, vm});
    map.offset = Vector(2);
    const double nu2 = std::pow(norm(vp - vm, Norm::l2), 2);
    const double mu2 = std::pow(frobenius(map.v), 2);
    const double mixed = 0.5 * dot(vp, vp) + std::abs(dot(vp, vm)) + 0.5 * dot(vm, vm);
    const double e_lo = excess(nu2 / 2.0, mixed), e_hi = excess(mixed, mu2);
    v_lo += e_lo > kIneqSlack;
    v_hi += e_hi > kIneqSlack;
    w_lo = std::max(w_lo, e_lo);
    w_hi = std::max(w_hi, e_hi);

    const PredictionRecord rec = softmax_ce(zz, argmax(zz));
    const InputForms f = binary_forms(map, rec);
    const double g2 = dot(f.gradient, f.gradient);
    const double hn = f.hessian.spectral_norm();
    const double e_g = excess(g2, hn), e_h = excess(hn, chain_factor * mu2);
    v_grad += e_g > kIneqSlack;
    v_hess += e_h > kIneqSlack;
    w_grad = std::max(w_grad, e_g);
    w_hess = std::max(w_hess, e_h);
  }
  auto clamp0 = [](double w) { return std::max(0.0, w); };
  res.rows.push_back(
      count_report("cross_lipschitz_half_le_mixed_sum", v_lo, clamp0(w_lo), kIneqSlack));
  res.rows.push_back(count_report("mixed_sum_le_lipschitz", v_hi, clamp0(w_hi), kIneqSlack));
  res.rows.push_back(
      count_report("chain_grad_sq_le_hessian", v_grad, clamp0(w_grad), kIneqSlack));
  res.rows.push_back(
      count_report("chain_hessian_le_half_mu_sq", v_hess, clamp0(w_hess), kIneqSlack));

  // r2 increases with p_y on 0.51..0.99 when the slack follows p (xi = log 2 + log p).
  for (double nu : {0.5, 1.0, 2.0, 5.0}) {
    std::size_t drops = 0;
    double prev = -kInf;
    for (int step = 51; step <= 99; ++step) {
      const double p = step / 100.0;
      const double r = r2_with_fault(p, 1.0 - p, nu, std::log(2.0) + std::log(p), opt.fault);
      drops += !(r > prev);
      prev = r;
    }
    OracleReport r = count_report("r2_increasing_in_p_y [nu=" + std::to_string(nu) + "]", drops,
                                  static_cast<double>(drops), 0.0);
    res.rows.push_back(r);
  }
  res.seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------

const std::vector<SuiteInfo>& verification_registry() {
  static const std::vector<SuiteInfo> registry{
      {"closed-forms",
       "input-gradient and Hessian vs finite differences, identities, local map, spectra",
       &verify_closed_forms,
       [](const VerifyOptions& o) {
         const std::size_t k2 = count_k2(o.networks, 3);
         return 5 * o.networks + 3 * k2 + (o.networks - k2);
       }},
      {"certificates", "binary radii and worst-case loss vs search and enumeration",
       &verify_certificates, [](const VerifyOptions& o) { return 6 * o.binary_fixtures; }},
      {"multiclass-bounds", "multi-class lower bounds never exceed the minimal perturbation",
       &verify_multiclass_bounds,
       [](const VerifyOptions& o) {
         return o.multiclass_fixtures + count_k2(o.multiclass_fixtures, 9);
       }},
      {"inequalities", "fuzzed norm inequalities and radius monotonicity", &verify_inequalities,
       [](const VerifyOptions&) -> std::size_t { return 8; }},
  };
  return registry;
}

VerifyResult run_verification(const VerifyOptions& opt, const std::vector<std::string>& suites) {
  for (const auto& name : suites) {
    const auto& reg = verification_registry();
    if (std::none_of(reg.begin(), reg.end(), [&](const SuiteInfo& s) { return s.name == name; }))
      throw std::invalid_argument("unknown verification suite '" + name + "'");
  }
  VerifyResult out;
  for (const SuiteInfo& s : verification_registry()) {
    if (!suites.empty() && std::find(suites.begin(), suites.end(), s.name) == suites.end())
      continue;
    out.suites.push_back(s.run(opt));
  }
  return out;
}

}  // namespace rrl
