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

#ifndef RRL_SERIALIZE_HPP
#define RRL_SERIALIZE_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rrl/network.hpp"

namespace rrl {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Weight file layout (little-endian, see docs/network_format.md):
//   "RRLNET1" | u8 kind | f64 alpha | u8 has_bias | u32 depth | u32 widths[depth+1]
//   | per layer: f64 W[n_{j-1} * n_j] row-major, then f64 b[n_j] if has_bias
std::vector<std::uint8_t> encode_network(const Network& net);
Network decode_network(const std::vector<std::uint8_t>& bytes);

void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

/// 64-bit FNV-1a, used for weight-file and dataset checksums in manifests.
std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes);
std::uint64_t file_checksum(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

}  // namespace rrl

#endif  // RRL_SERIALIZE_HPP
