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


#ifndef RRL_CONFIG_HPP
#define RRL_CONFIG_HPP

// JSON run configuration shared by every CLI command. All sections are
// optional; unknown keys are rejected so typos do not silently fall back to
// defaults. Errors carry the line of the offending text.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rrl/attack.hpp"
#include "rrl/data.hpp"
#include "rrl/sweep.hpp"
#include "rrl/train.hpp"

namespace rrl {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct DataSpec {
  std::string images;  ///< IDX image file
  std::string labels;  ///< IDX label file
  std::string inputs_csv;  ///< alternative: rows "label,x1,...,xn"
  std::vector<std::size_t> digits;  ///< two digits -> binary subset (first = class 0)
  double train_fraction = 0.8;  ///< 0 puts everything in the test split
  std::uint64_t split_seed = 1;
  std::size_t max_train = 0;  ///< 0 = no cap
  std::size_t max_test = 0;
  std::string synthetic;  ///< "tsipras" to generate instead of loading
  std::size_t synth_samples = 1000;
  std::size_t synth_dim = 10;
  double synth_eta = kTsiprasEta;
  std::uint64_t synth_seed = 1;
};

struct ModelSpec {
  std::vector<std::size_t> hidden{300, 100};
  Activation activation = Activation::relu();
  bool bias = true;
};

struct RunConfig {
  DataSpec data;
  ModelSpec model;
  TrainConfig train = baseline_defaults();
  TrainConfig finetune = finetune_defaults();
  SweepConfig sweep;
  std::vector<AttackConfig> attacks;  ///< empty: command defaults
  int clip = -1;                      ///< -1 follows the data, 0 off, 1 on
  bool save_weights = false;          ///< sweep: write every fine-tuned network
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Resolved configuration, as recorded in manifests.
nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const AttackConfig& cfg);

/// Default attack set of the sweep: fgsm and pgd at eps = 0.1, deepfool.
std::vector<AttackConfig> default_attacks();

struct LoadedData {
  Dataset all;  ///< before splitting
  Dataset train;
  Dataset test;
  std::vector<std::pair<std::string, std::string>> checksums;  ///< (path, fnv1a64 hex)
};

/// Loads or generates the data and splits it. Throws IdxError / std::runtime_error
/// on I/O problems and ConfigError on inconsistent specs.
LoadedData load_data(const DataSpec& spec);

/// Attacks of a run: the configured list (or the defaults), clipped to [0, 1]
/// when `clip` says so or, with clip = -1, when the data is bounded.
std::vector<AttackConfig> resolve_attacks(const RunConfig& cfg, const Dataset& data);

/// The sweep described by `cfg` on `data`, validated; throws ConfigError.
SweepConfig resolve_sweep(const RunConfig& cfg, const LoadedData& data);

/// "label,x1,...,xn" per line; '#' lines are comments. K = max label + 1 (>= 2).
Dataset parse_inputs_csv(const std::string& text);

/// Comma-separated list of doubles, e.g. "0,0.1,1".
std::vector<double> parse_double_list(const std::string& text);

}  // namespace rrl

#endif  // RRL_CONFIG_HPP
