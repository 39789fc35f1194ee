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

#ifndef RRL_TRAIN_HPP
#define RRL_TRAIN_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rrl/data.hpp"
#include "rrl/network.hpp"
#include "rrl/regularize.hpp"

namespace rrl {

/// Non-finite loss, gradient or weights during training.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int epoch, std::size_t batch)
      : std::runtime_error(what), epoch_(epoch), batch_(batch) {}
  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  int epoch_;
  std::size_t batch_;
};

enum class LrSchedule { constant, step_decay };
enum class Freeze { none, final_layer };

std::string to_string(LrSchedule s);
LrSchedule parse_schedule(const std::string& name);

struct TrainConfig {
  int epochs = 20;
  std::size_t batch_size = 32;  ///< 0 = full batch
  double learning_rate = 0.1;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  LrSchedule schedule = LrSchedule::step_decay;
  RegularizerSpec reg;
  Freeze freeze = Freeze::none;

  void validate() const;
  /// Step decay: x0.1 at half and again at three quarters of the epochs.
  double lr_at(int epoch) const;
};

/// Repo constants for the fine-tuning protocol.
TrainConfig baseline_defaults();
TrainConfig finetune_defaults();

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  double ce = 0.0;         ///< mean over the epoch's batches
  double reg = 0.0;
  double objective = 0.0;  ///< ce + reg
  double train_acc = 0.0;
};

struct TrainResult {
  Network net;
  std::vector<EpochRecord> trace;
};

/// SGD with momentum (v <- m v + g, w <- w - lr v) on mean CE + mean reg.
/// Deterministic given the config seed. Throws DivergenceError.
TrainResult train(const Network& init, const Dataset& data, const TrainConfig& cfg);

/// Continues training with CE + lambda * reg.
TrainResult finetune(const Network& pretrained, const Dataset& data, RegularizerKind kind,
                     double lambda, TrainConfig cfg);

/// He-initialized network with widths input, hidden..., classes.
Network make_network(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                     std::size_t num_classes, Activation act, bool with_bias, std::uint64_t seed);

double accuracy(const Network& net, const Dataset& data);

struct ObjectiveValue {
  double ce = 0.0;
  double reg = 0.0;
  double objective() const { return ce + reg; }
};
/// Means over the whole dataset at fixed weights.
ObjectiveValue dataset_objective(const Network& net, const Dataset& data,
                                 const RegularizerSpec& reg);

}  // namespace rrl

#endif  // RRL_TRAIN_HPP
