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


// Shared fixtures for the unit tests.

#ifndef RRL_TESTS_FIXTURES_HPP
#define RRL_TESTS_FIXTURES_HPP

#include <random>

#include "rrl/network.hpp"

namespace rrl::testing {

// Bias-free linear binary net: v+ = (1, 0), v- = (-1, 0). At x = (0.5, 0)
// the logits are (0.5, -0.5).
inline Network reference_net() {
  return Network({Matrix{{1.0, -1.0}, {0.0, 0.0}}}, {}, Activation::relu());
}
inline Vector reference_x() { return Vector{0.5, 0.0}; }

// Same logits at x = (0.5, 0.5) with v+ - v- = (1, 1).
inline Network diagonal_net() {
  return Network({Matrix{{0.5, -0.5}, {0.5, -0.5}}}, {}, Activation::relu());
}
inline Vector diagonal_x() { return Vector{0.5, 0.5}; }

inline Vector gaussian(std::mt19937_64& rng, std::size_t n, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Vector v(n);
  for (double& e : v) e = g(rng);
  return v;
}

// p_y, loss and slack of the reference fixture.
inline constexpr double kRefP = 0.7310585786300049;
inline constexpr double kRefLoss = 0.3132616875182228;
inline constexpr double kRefSlack = 0.3798854930417225;

}  // namespace rrl::testing

#endif  // RRL_TESTS_FIXTURES_HPP
