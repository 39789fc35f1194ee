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

#include "rrl/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace rrl {

namespace {

constexpr char kMagic[] = "RRLNET1";
constexpr std::size_t kMagicLen = 7;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw FormatError("weight file truncated");
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return std::bit_cast<double>(bits);
  }
  bool done() const { return pos_ == in_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_network(const Network& net) {
  Writer w;
  w.bytes(kMagic, kMagicLen);
  w.u8(net.activation().kind == ActivationKind::relu ? 0 : 1);
  w.f64(net.activation().alpha);
  w.u8(net.has_biases() ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(net.depth()));
  for (std::size_t width : net.widths()) w.u32(static_cast<std::uint32_t>(width));
  for (std::size_t j = 0; j < net.depth(); ++j) {
    for (double v : net.weight(j).flat()) w.f64(v);
    if (net.has_biases())
      for (double v : net.bias(j)) w.f64(v);
  }
  return w.take();
}

Network decode_network(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kMagicLen || std::memcmp(bytes.data(), kMagic, kMagicLen) != 0)
    throw FormatError("not an RRLNET1 weight file");
  Reader r(bytes);
  for (std::size_t i = 0; i < kMagicLen; ++i) r.u8();
  const std::uint8_t kind = r.u8();
  if (kind > 1) throw FormatError("unknown activation kind " + std::to_string(kind));
  const double alpha = r.f64();
  const std::uint8_t has_bias = r.u8();
  if (has_bias > 1) throw FormatError("bad bias flag");
  const std::uint32_t depth = r.u32();
  if (depth == 0 || depth > 1024) throw FormatError("implausible depth");
  std::vector<std::size_t> widths(depth + 1);
  for (auto& width : widths) {
    width = r.u32();
    if (width == 0) throw FormatError("zero layer width");
  }
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  for (std::uint32_t j = 0; j < depth; ++j) {
    const std::size_t count = widths[j] * widths[j + 1];
    r.need(count * 8);
    std::vector<double> payload(count);
    for (double& v : payload) v = r.f64();
    weights.emplace_back(widths[j], widths[j + 1], std::move(payload));
    if (has_bias) {
      Vector b(widths[j + 1]);
      for (double& v : b) v = r.f64();
      biases.push_back(std::move(b));
    }
  }
  if (!r.done()) throw FormatError("trailing bytes after weight payload");
  Activation act = kind == 0 ? Activation::relu() : Activation::leaky(alpha);
  try {
    return Network(std::move(weights), std::move(biases), act);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("inconsistent weight file: ") + e.what());
  }
}

void save_network(const Network& net, const std::filesystem::path& path) {
  const auto bytes = encode_network(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Network load_network(const std::filesystem::path& path) { return decode_network(read_all(path)); }

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t file_checksum(const std::filesystem::path& path) { return fnv1a64(read_all(path)); }

std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

}  // namespace rrl
