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

#include "rrl/network.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rrl {

Network::Network(std::vector<Matrix> weights, std::vector<Vector> biases,
                 Activation activation)
    : weights_(std::move(weights)), biases_(std::move(biases)), activation_(activation) {
  if (weights_.empty()) throw DimensionError("network needs at least one layer");
  if (activation_.kind == ActivationKind::leaky &&
      !(activation_.alpha >= 0.0 && activation_.alpha < 1.0))
    throw std::invalid_argument("leaky slope must lie in [0, 1)");
  widths_.push_back(weights_.front().rows());
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    if (weights_[j].rows() != widths_.back())
      throw DimensionError("layer " + std::to_string(j + 1) + " does not chain");
    widths_.push_back(weights_[j].cols());
  }
  if (widths_.back() < 2) throw DimensionError("network needs at least two classes");
  if (!biases_.empty()) {
    if (biases_.size() != weights_.size())
      throw DimensionError("bias count differs from layer count");
    for (std::size_t j = 0; j < biases_.size(); ++j)
      if (biases_[j].size() != weights_[j].cols())
        throw DimensionError("bias " + std::to_string(j + 1) + " has the wrong width");
  }
}

Network Network::random(const std::vector<std::size_t>& widths, Activation activation,
                        bool with_bias, std::mt19937_64& rng) {
  if (widths.size() < 2) throw DimensionError("need input and output widths");
  std::vector<Matrix> w;
  std::vector<Vector> b;
  for (std::size_t j = 1; j < widths.size(); ++j) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(widths[j - 1])));
    Matrix m(widths[j - 1], widths[j]);
    for (double& v : m.flat()) v = dist(rng);
    w.push_back(std::move(m));
    if (with_bias) b.emplace_back(widths[j], 0.0);
  }
  return Network(std::move(w), std::move(b), activation);
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights_) n += w.size();
  for (const auto& b : biases_) n += b.size();
  return n;
}

bool Network::parameters_finite() const {
  for (const auto& w : weights_)
    if (!all_finite(w.flat())) return false;
  for (const auto& b : biases_)
    if (!all_finite(b.span())) return false;
  return true;
}

Vector LocalLinearMap::logits(const Vector& x) const {
  Vector z = matvec_t(v, x);
  if (!offset.empty()) z += offset;
  return z;
}

ParamGradients ParamGradients::zeros_like(const Network& net) {
  ParamGradients g;
  for (const auto& w : net.weights()) g.weights.emplace_back(w.rows(), w.cols());
  for (const auto& b : net.biases()) g.biases.emplace_back(b.size());
  return g;
}

ParamGradients& ParamGradients::operator+=(const ParamGradients& other) {
  for (std::size_t j = 0; j < weights.size(); ++j) weights[j] += other.weights[j];
  for (std::size_t j = 0; j < biases.size(); ++j) biases[j] += other.biases[j];
  return *this;
}

ParamGradients& ParamGradients::operator*=(double s) {
  for (auto& w : weights) w *= s;
  for (auto& b : biases) b *= s;
  return *this;
}

double ParamGradients::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weights) s += dot(w.flat(), w.flat());
  for (const auto& b : biases) s += dot(b, b);
  return s;
}

ForwardPass forward(const Network& net, const Vector& x) {
  if (x.size() != net.input_dim()) throw DimensionError("forward: input width mismatch");
  if (!all_finite(x.span())) throw std::invalid_argument("forward: non-finite input");
  const double slope = net.activation().negative_slope();
  ForwardPass pass;
  pass.activations.push_back(x);
  for (std::size_t j = 0; j + 1 < net.depth(); ++j) {
    Vector h = matvec_t(net.weight(j), pass.activations.back());
    if (net.has_biases()) h += net.bias(j);
    Vector a = h;
    for (double& v : a) v = v > 0.0 ? v : slope * v;
    pass.preactivations.push_back(std::move(h));
    pass.activations.push_back(std::move(a));
  }
  pass.logits = matvec_t(net.weight(net.depth() - 1), pass.activations.back());
  if (net.has_biases()) pass.logits += net.bias(net.depth() - 1);
  return pass;
}

Vector logits(const Network& net, const Vector& x) { return forward(net, x).logits; }

std::size_t argmax(const Vector& z) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < z.size(); ++k)
    if (z[k] > z[best]) best = k;
  return best;
}

std::size_t predict(const Network& net, const Vector& x) { return argmax(logits(net, x)); }

namespace {

ActivationPattern pattern_from(const Network& net, const ForwardPass& pass) {
  const double slope = net.activation().negative_slope();
  ActivationPattern p;
  for (const auto& h : pass.preactivations) {
    std::vector<double> m(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) m[i] = h[i] > 0.0 ? 1.0 : slope;
    p.multipliers.push_back(std::move(m));
  }
  return p;
}

}  // namespace

ActivationPattern activation_pattern(const Network& net, const Vector& x) {
  return pattern_from(net, forward(net, x));
}

LocalLinearMap local_linear_map(const Network& net, const Vector& x) {
  const ForwardPass pass = forward(net, x);
  LocalLinearMap map;
  map.pattern = pattern_from(net, pass);
  const std::size_t d = net.depth();
  const std::size_t k_count = net.num_classes();
  map.v = Matrix(net.input_dim(), k_count);
  // One backward pass per logit with the pattern frozen.
  for (std::size_t k = 0; k < k_count; ++k) {
    Vector g = net.weight(d - 1).column(k);
    for (std::size_t j = d - 1; j-- > 0;) {
      const auto& mult = map.pattern.multipliers[j];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mult[i];
      g = matvec(net.weight(j), g);
    }
    map.v.set_column(k, g);
  }
  map.offset = pass.logits - matvec_t(map.v, x);
  return map;
}

double boundary_margin(const Network& net, const Vector& x) {
  const ForwardPass pass = forward(net, x);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& h : pass.preactivations)
    for (double v : h) margin = std::min(margin, std::abs(v));
  return margin;
}

}  // namespace rrl
