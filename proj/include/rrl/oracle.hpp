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

#ifndef RRL_ORACLE_HPP
#define RRL_ORACLE_HPP

// Brute-force references. Nothing in here calls the closed forms it is
// meant to check: losses are recomputed from logits, spectra come from
// Jacobi rotations, and perturbation minima from direct search.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rrl/linalg.hpp"
#include "rrl/network.hpp"

namespace rrl {

struct OracleReport {
  std::string quantity;
  double analytic = 0.0;
  double oracle = 0.0;
  double rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double boundary_margin = 0.0;  ///< NaN when not applicable
  double step = 0.0;             ///< FD step, 0 when not applicable
};

/// Relative error |a - b| / max(|b|, floor); floor keeps zero references sane.
double relative_error(double analytic, double oracle, double floor = 1e-12);
/// Same for vectors/matrices under the l2/Frobenius norm.
double relative_error(const Vector& analytic, const Vector& oracle, double floor = 1e-12);
double relative_error(const Matrix& analytic, const Matrix& oracle, double floor = 1e-12);

OracleReport make_report(std::string quantity, double analytic, double oracle, double tolerance,
                         double margin = 0.0, double step = 0.0);

using ScalarField = std::function<double(const Vector&)>;

/// (f(x + h e_i) - f(x - h e_i)) / 2h.
Vector fd_gradient(const ScalarField& f, const Vector& x, double h = 1e-4);
/// Four-point mixed central differences, symmetrized.
Matrix fd_hessian(const ScalarField& f, const Vector& x, double h = 1e-3);

/// -log softmax(z)_y computed as logsumexp(z) - z_y.
double ce_loss_naive(const Vector& z, std::size_t y);

/// Sign test of every hidden preactivation, recomputed with plain loops.
ActivationPattern pattern_naive(const Network& net, const Vector& x);
/// V = W_1 D_1 W_2 D_2 ... W_d from explicit matrix products.
Matrix local_map_by_product(const Network& net, const Vector& x);

struct SymmetricSpectrum {
  std::vector<double> values;  ///< descending
  Matrix vectors;              ///< column i pairs with values[i]
  int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal norm is <= 1e-12 (relative
/// to the Frobenius norm). n <= 64.
SymmetricSpectrum dense_eig_sym(const Matrix& a);

struct MinPerturbation {
  double radius = 0.0;
  Vector argmin;              ///< a minimizing perturbation
  bool confirmed = false;     ///< the random search found nothing smaller
  double best_search = 0.0;   ///< smallest radius seen by the random search
  std::size_t directions = 0;
};

/// Smallest ||r|| with L + g^T r + r^T H r / 2 >= beta, for PSD H.
/// l2: trust-region secular equation in the eigenbasis of H, then confirmed
///     by a seeded random-direction search with local refinement.
/// linf: exact, by enumerating the 2^n sign vertices (n <= 12).
/// Throws ConvergenceError if the search beats the reported minimum.
MinPerturbation min_pert_quadratic(double loss, const Vector& g, const Matrix& h, double beta,
                                   Norm norm, std::size_t restarts = 1000,
                                   std::uint64_t seed = 0x0dd5eed);

struct BoxMaximum {
  double value = 0.0;
  Vector maximizer;
};

/// max over ||r||_inf <= eps of L + g^T r + r^T H r / 2, by vertex
/// enumeration (exact for PSD H). n <= 12.
BoxMaximum max_loss_box(double loss, const Vector& g, const Matrix& h, double eps);

constexpr std::size_t kMaxEnumerationDim = 12;
constexpr std::size_t kMaxJacobiDim = 64;

}  // namespace rrl

#endif  // RRL_ORACLE_HPP
