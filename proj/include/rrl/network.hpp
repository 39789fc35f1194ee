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

#ifndef RRL_NETWORK_HPP
#define RRL_NETWORK_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rrl/linalg.hpp"

namespace rrl {

struct RegularizerSpec;

enum class ActivationKind { relu, leaky };

/// General ReLU: x for x > 0, alpha * x otherwise (alpha = 0 for plain ReLU).
struct Activation {
  ActivationKind kind = ActivationKind::relu;
  double alpha = 0.0;

  static Activation relu() { return {ActivationKind::relu, 0.0}; }
  static Activation leaky(double alpha) { return {ActivationKind::leaky, alpha}; }

  /// Multiplier applied to a non-positive preactivation.
  double negative_slope() const { return kind == ActivationKind::relu ? 0.0 : alpha; }
  bool operator==(const Activation&) const = default;
};

/**
 * Multi-layer perceptron g(x) = W_d^T s(W_{d-1}^T s(... s(W_1^T x + b_1) ...) + b_{d-1}) + b_d.
 *
 * W_j is stored as an n_{j-1} x n_j matrix (rows index the layer input), so a
 * layer maps a_{j-1} to W_j^T a_{j-1} + b_j. Biases are optional; a bias-free
 * network keeps an empty bias list.
 */
class Network {
 public:
  Network() = default;
  Network(std::vector<Matrix> weights, std::vector<Vector> biases, Activation activation);

  /// He-normal weights, zero biases.
  static Network random(const std::vector<std::size_t>& widths, Activation activation,
                        bool with_bias, std::mt19937_64& rng);

  std::size_t depth() const { return weights_.size(); }
  std::size_t input_dim() const { return widths_.front(); }
  std::size_t num_classes() const { return widths_.back(); }
  const std::vector<std::size_t>& widths() const { return widths_; }
  const Activation& activation() const { return activation_; }
  bool has_biases() const { return !biases_.empty(); }

  const Matrix& weight(std::size_t j) const { return weights_[j]; }
  Matrix& weight(std::size_t j) { return weights_[j]; }
  const Vector& bias(std::size_t j) const { return biases_[j]; }
  Vector& bias(std::size_t j) { return biases_[j]; }
  const std::vector<Matrix>& weights() const { return weights_; }
  const std::vector<Vector>& biases() const { return biases_; }

  std::size_t parameter_count() const;
  bool parameters_finite() const;

  bool operator==(const Network&) const = default;

 private:
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
  Activation activation_;
  std::vector<std::size_t> widths_;
};

/// Per hidden layer, per unit: 1 where the preactivation is > 0, alpha otherwise.
struct ActivationPattern {
  std::vector<std::vector<double>> multipliers;
  bool operator==(const ActivationPattern&) const = default;
};

struct ForwardPass {
  std::vector<Vector> activations;     ///< a_0 = x, ..., a_{d-1}
  std::vector<Vector> preactivations;  ///< hidden preactivations, layers 1..d-1
  Vector logits;
};

/// The affine map g(x') = V^T x' + offset that the network computes on the
/// activation region containing the extraction point.
struct LocalLinearMap {
  Matrix v;  ///< n x K; column k is the fixed-pattern gradient of logit k
  Vector offset;
  ActivationPattern pattern;

  std::size_t input_dim() const { return v.rows(); }
  std::size_t num_classes() const { return v.cols(); }
  Vector column(std::size_t k) const { return v.column(k); }
  Vector logits(const Vector& x) const;
};

/// Gradient of a scalar objective with respect to every weight and bias.
struct ParamGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;  ///< empty for bias-free networks

  static ParamGradients zeros_like(const Network& net);
  ParamGradients& operator+=(const ParamGradients& other);
  ParamGradients& operator*=(double s);
  double squared_norm() const;
};

ForwardPass forward(const Network& net, const Vector& x);
Vector logits(const Network& net, const Vector& x);
std::size_t predict(const Network& net, const Vector& x);

ActivationPattern activation_pattern(const Network& net, const Vector& x);
LocalLinearMap local_linear_map(const Network& net, const Vector& x);

/// Smallest |preactivation| over all hidden units; +inf without hidden layers.
double boundary_margin(const Network& net, const Vector& x);

/// Gradient of the cross-entropy loss at (x, y), plus the regularizer when
/// given. Activation patterns are held fixed (subgradient convention).
ParamGradients param_gradients(const Network& net, const Vector& x, std::size_t y,
                               const RegularizerSpec* reg = nullptr);

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(const Vector& z);

}  // namespace rrl

#endif  // RRL_NETWORK_HPP
