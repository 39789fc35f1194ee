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

#ifndef RRL_DATA_HPP
#define RRL_DATA_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rrl/linalg.hpp"

namespace rrl {

/// Malformed or inconsistent IDX input.
class IdxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  Matrix inputs;  ///< one sample per row
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;
  std::string split = "all";
  std::size_t image_rows = 0;  ///< 0 for non-image data
  std::size_t image_cols = 0;
  bool bounded = false;  ///< inputs live in [0, 1]

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::size_t dim() const { return inputs.cols(); }
  Vector input(std::size_t i) const { return Vector(inputs.row(i)); }
  /// Count of each label, length num_classes.
  std::vector<std::size_t> class_counts() const;
};

/// Parses an IDX image file (magic 0x00000803, u8, [N, rows, cols]) and its
/// label file (0x00000801, u8, [N]); pixels are divided by 255.
/// `num_classes` = 0 infers max label + 1 (at least 2 for a non-empty set).
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::size_t num_classes = 0);
/// In-memory variant of load_idx.
Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels,
                  std::size_t num_classes = 0);

/// Writes the pair back; pixels are rounded to the nearest of 0..255.
void save_idx(const Dataset& d, const std::string& images_path, const std::string& labels_path);
std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> encode_idx(const Dataset& d);

/// Keeps the two digits; pos -> class 0 (y = +1), neg -> class 1. Order preserved.
Dataset binary_subset(const Dataset& d, std::size_t pos_digit, std::size_t neg_digit);

/// y uniform in {+1, -1} (class 0 / 1); x_1 ~ N(0, 1) independent of y;
/// x_2..x_dim ~ N(eta * y, 1).
Dataset synth_tsipras(std::size_t n_samples, std::size_t dim, double eta, std::uint64_t seed);
constexpr double kTsiprasEta = 0.5;

/// Deterministic shuffled split; the train part gets round(fraction * N) samples.
std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed);

/// Rows of `d` at the given indices, in that order.
Dataset subset(const Dataset& d, std::span<const std::size_t> indices);
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> indices);

}  // namespace rrl

#endif  // RRL_DATA_HPP
