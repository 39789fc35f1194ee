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

#include "rrl/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>

namespace rrl {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IdxError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IdxError("write failed: " + path);
}

}  // namespace

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t y : labels) ++counts.at(y);
  return counts;
}

Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels,
                  std::size_t num_classes) {
  if (images.size() < 16) throw IdxError("image file shorter than its header");
  if (labels.size() < 8) throw IdxError("label file shorter than its header");
  if (read_be32(images, 0) != kImageMagic)
    throw IdxError("bad image magic (expected 0x00000803)");
  if (read_be32(labels, 0) != kLabelMagic)
    throw IdxError("bad label magic (expected 0x00000801)");
  const std::size_t n = read_be32(images, 4);
  const std::size_t rows = read_be32(images, 8);
  const std::size_t cols = read_be32(images, 12);
  const std::size_t n_labels = read_be32(labels, 4);
  if (n != n_labels)
    throw IdxError("image count " + std::to_string(n) + " != label count " +
                   std::to_string(n_labels));
  const std::size_t pixels = rows * cols;
  if (images.size() != 16 + n * pixels) throw IdxError("image payload size mismatch");
  if (labels.size() != 8 + n) throw IdxError("label payload size mismatch");

  Dataset d;
  d.image_rows = rows;
  d.image_cols = cols;
  d.bounded = true;
  d.inputs = Matrix(n, pixels);
  auto flat = d.inputs.flat();
  for (std::size_t i = 0; i < n * pixels; ++i) flat[i] = images[16 + i] / 255.0;
  std::size_t max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d.labels.push_back(labels[8 + i]);
    max_label = std::max<std::size_t>(max_label, labels[8 + i]);
  }
  if (num_classes == 0) {
    d.num_classes = n == 0 ? 0 : std::max<std::size_t>(2, max_label + 1);
  } else {
    if (n > 0 && max_label >= num_classes)
      throw IdxError("label " + std::to_string(max_label) + " exceeds class count");
    d.num_classes = num_classes;
  }
  return d;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::size_t num_classes) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);
  return parse_idx(images, labels, num_classes);
}

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> encode_idx(const Dataset& d) {
  std::size_t rows = d.image_rows, cols = d.image_cols;
  if (rows * cols != d.dim()) {
    rows = 1;
    cols = d.dim();
  }
  std::vector<std::uint8_t> img, lab;
  put_be32(img, kImageMagic);
  put_be32(img, static_cast<std::uint32_t>(d.size()));
  put_be32(img, static_cast<std::uint32_t>(rows));
  put_be32(img, static_cast<std::uint32_t>(cols));
  for (double v : d.inputs.flat()) {
    const double px = std::clamp(std::round(v * 255.0), 0.0, 255.0);
    img.push_back(static_cast<std::uint8_t>(px));
  }
  put_be32(lab, kLabelMagic);
  put_be32(lab, static_cast<std::uint32_t>(d.size()));
  for (std::size_t y : d.labels) {
    if (y > 255) throw IdxError("label does not fit in u8");
    lab.push_back(static_cast<std::uint8_t>(y));
  }
  return {std::move(img), std::move(lab)};
}

void save_idx(const Dataset& d, const std::string& images_path, const std::string& labels_path) {
  const auto [img, lab] = encode_idx(d);
  write_file(images_path, img);
  write_file(labels_path, lab);
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), m.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = m.row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

Dataset subset(const Dataset& d, std::span<const std::size_t> indices) {
  Dataset out;
  out.inputs = gather_rows(d.inputs, indices);
  for (std::size_t i : indices) out.labels.push_back(d.labels.at(i));
  out.num_classes = d.num_classes;
  out.split = d.split;
  out.image_rows = d.image_rows;
  out.image_cols = d.image_cols;
  out.bounded = d.bounded;
  return out;
}

Dataset binary_subset(const Dataset& d, std::size_t pos_digit, std::size_t neg_digit) {
  if (pos_digit == neg_digit) throw std::invalid_argument("binary_subset: digits must differ");
  std::vector<std::size_t> keep;
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.labels[i] == pos_digit) {
      keep.push_back(i);
      labels.push_back(0);
    } else if (d.labels[i] == neg_digit) {
      keep.push_back(i);
      labels.push_back(1);
    }
  }
  if (keep.empty()) throw std::invalid_argument("binary_subset: neither digit present");
  Dataset out = subset(d, keep);
  out.labels = std::move(labels);
  out.num_classes = 2;
  return out;
}

Dataset synth_tsipras(std::size_t n_samples, std::size_t dim, double eta, std::uint64_t seed) {
  if (dim < 2) throw DimensionError("synth_tsipras: dim must be at least 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::bernoulli_distribution coin(0.5);
  Dataset d;
  d.num_classes = 2;
  d.inputs = Matrix(n_samples, dim);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const bool positive = coin(rng);
    const double y = positive ? 1.0 : -1.0;
    d.labels.push_back(positive ? 0 : 1);
    d.inputs(i, 0) = gauss(rng);
    for (std::size_t j = 1; j < dim; ++j) d.inputs(i, j) = eta * y + gauss(rng);
  }
  return d;
}

std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split: fraction must lie in (0, 1)");
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = rng() % i;
    std::swap(order[i - 1], order[j]);
  }
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(d.size())));
  std::span<const std::size_t> all(order);
  Dataset train = subset(d, all.subspan(0, n_train));
  Dataset test = subset(d, all.subspan(n_train));
  train.split = "train";
  test.split = "test";
  return {std::move(train), std::move(test)};
}

}  // namespace rrl
