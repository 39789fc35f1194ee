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

#include "rrl/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rrl/objective.hpp"

namespace rrl {

std::string to_string(LrSchedule s) {
  return s == LrSchedule::constant ? "constant" : "step-decay";
}

LrSchedule parse_schedule(const std::string& name) {
  if (name == "constant") return LrSchedule::constant;
  if (name == "step-decay") return LrSchedule::step_decay;
  throw std::invalid_argument("unknown lr schedule '" + name +
                              "' (expected constant or step-decay)");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("momentum must lie in [0, 1)");
  reg.validate();
}

double TrainConfig::lr_at(int epoch) const {
  if (schedule == LrSchedule::constant) return learning_rate;
  double lr = learning_rate;
  if (epoch >= epochs / 2) lr *= 0.1;
  if (epoch >= (3 * epochs) / 4) lr *= 0.1;
  return lr;
}

TrainConfig baseline_defaults() {
  TrainConfig c;
  c.epochs = 20;
  c.learning_rate = 0.1;
  c.schedule = LrSchedule::step_decay;
  return c;
}

TrainConfig finetune_defaults() {
  TrainConfig c;
  c.epochs = 10;
  c.learning_rate = 0.01;
  c.schedule = LrSchedule::constant;
  return c;
}

namespace {

bool gradients_finite(const ParamGradients& g) {
  for (const auto& w : g.weights)
    if (!all_finite(w.flat())) return false;
  for (const auto& b : g.biases)
    if (!all_finite(b.span())) return false;
  return true;
}

}  // namespace

TrainResult train(const Network& init, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  if (data.dim() != init.input_dim()) throw DimensionError("train: data width != network input");
  if (data.num_classes != init.num_classes())
    throw DimensionError("train: class count != network outputs");
  if (!supports(cfg.reg.kind, init.num_classes()))
    throw std::invalid_argument("train: " + to_string(cfg.reg.kind) +
                                " has no closed form for K = " +
                                std::to_string(init.num_classes()));

  TrainResult res{init, {}};
  Network& net = res.net;
  ParamGradients velocity = ParamGradients::zeros_like(net);
  const std::size_t n = data.size();
  const std::size_t bs = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
  const std::size_t first_layer = cfg.freeze == Freeze::final_layer ? net.depth() - 1 : 0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr_at(epoch);
    if (bs < n)
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double ce = 0.0, reg = 0.0;
    std::size_t correct = 0, batches = 0;
    for (std::size_t start = 0; start < n; start += bs, ++batches) {
      const std::size_t len = std::min(bs, n - start);
      const std::span<const std::size_t> idx(order.data() + start, len);
      const Matrix x = gather_rows(data.inputs, idx);
      std::vector<std::size_t> y(len);
      for (std::size_t i = 0; i < len; ++i) y[i] = data.labels[idx[i]];

      BatchResult br;
      try {
        br = batch_objective(net, x, y, cfg.reg);
      } catch (const DimensionError&) {
        throw;
      } catch (const std::invalid_argument& e) {
        // Finite weights can still overflow the logits.
        throw DivergenceError(std::string("epoch ") + std::to_string(epoch + 1) + ": " + e.what(),
                              epoch, batches);
      }
      const double scale = 1.0 / static_cast<double>(len);
      const double batch_obj = (br.ce_sum + br.reg_sum) * scale;
      if (!std::isfinite(batch_obj) || !gradients_finite(br.grad))
        throw DivergenceError("non-finite objective at epoch " + std::to_string(epoch + 1), epoch,
                              batches);
      ce += br.ce_sum;
      reg += br.reg_sum;
      correct += br.correct;
      br.grad *= scale;

      for (std::size_t j = first_layer; j < net.depth(); ++j) {
        Matrix& v = velocity.weights[j];
        v *= cfg.momentum;
        v += br.grad.weights[j];
        auto w = net.weight(j).flat();
        auto vf = v.flat();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * vf[i];
        if (net.has_biases()) {
          Vector& vb = velocity.biases[j];
          vb *= cfg.momentum;
          vb += br.grad.biases[j];
          Vector& b = net.bias(j);
          for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lr * vb[i];
        }
      }
      if (!net.parameters_finite())
        throw DivergenceError("non-finite weights at epoch " + std::to_string(epoch + 1), epoch,
                              batches);
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.learning_rate = lr;
    rec.ce = ce / static_cast<double>(n);
    rec.reg = reg / static_cast<double>(n);
    rec.objective = rec.ce + rec.reg;
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(n);
    res.trace.push_back(rec);
  }
  return res;
}

TrainResult finetune(const Network& pretrained, const Dataset& data, RegularizerKind kind,
                     double lambda, TrainConfig cfg) {
  cfg.reg = {kind, lambda};
  return train(pretrained, data, cfg);
}

Network make_network(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                     std::size_t num_classes, Activation act, bool with_bias, std::uint64_t seed) {
  std::vector<std::size_t> widths{input_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(num_classes);
  std::mt19937_64 rng(seed);
  return Network::random(widths, act, with_bias, rng);
}

double accuracy(const Network& net, const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (predict(net, data.input(i)) == data.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

ObjectiveValue dataset_objective(const Network& net, const Dataset& data,
                                 const RegularizerSpec& reg) {
  if (data.empty()) return {};
  ObjectiveOptions opt;
  opt.gradients = false;
  constexpr std::size_t kChunk = 256;
  ObjectiveValue v;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, data.size() - start);
    idx.resize(len);
    std::iota(idx.begin(), idx.end(), start);
    std::vector<std::size_t> y(len);
    for (std::size_t i = 0; i < len; ++i) y[i] = data.labels[idx[i]];
    const BatchResult br = batch_objective(net, gather_rows(data.inputs, idx), y, reg, opt);
    v.ce += br.ce_sum;
    v.reg += br.reg_sum;
  }
  v.ce /= static_cast<double>(data.size());
  v.reg /= static_cast<double>(data.size());
  return v;
}

}  // namespace rrl
