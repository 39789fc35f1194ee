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


#ifndef RRL_VERIFICATION_HPP
#define RRL_VERIFICATION_HPP

// Self-contained oracle suite: every closed form is checked against finite
// differences, dense eigensolvers, constrained-minimization search or vertex
// enumeration on seeded random fixtures. No external data.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rrl/oracle.hpp"

namespace rrl {

/// Deliberate defects for mutation testing of the suite itself.
enum class Fault {
  none,
  r2_sign,        ///< l2 radius with +1 instead of -1 after the square root
  grad_sign,      ///< input-gradient with flipped sign
  hessian_scale,  ///< Hessian doubled
  mc_unscaled,    ///< multi-class cross-Lipschitz bound without the pair normalization
  chain_bound,    ///< chained inequality upper end mu^2/4 instead of mu^2/2
};

std::string to_string(Fault f);
/// Names: "none", "r2-sign", "grad-sign", "hessian-scale", "mc-unscaled", "chain-bound".
Fault parse_fault(std::string_view name);
const std::vector<Fault>& all_faults();

struct VerifyOptions {
  std::uint64_t seed = 20190611;
  std::size_t networks = 120;              ///< closed-form suite
  std::size_t binary_fixtures = 200;       ///< certificate suite
  std::size_t multiclass_fixtures = 1000;  ///< multi-class bound suite
  std::size_t fuzz = 100000;               ///< per inequality
  std::size_t restarts = 1000;             ///< random-search confirmations
  double margin_guard = 1e-3;              ///< minimum boundary margin for FD fixtures
  Fault fault = Fault::none;
};

struct SuiteResult {
  std::string name;
  std::vector<OracleReport> rows;
  double seconds = 0.0;
  std::size_t rejected_fixtures = 0;  ///< redrawn because of pattern flips / small margins

  std::size_t failures() const;
  bool pass() const { return failures() == 0; }
};

struct VerifyResult {
  std::vector<SuiteResult> suites;
  bool pass() const;
  std::size_t row_count() const;
  std::size_t failures() const;
};

struct SuiteInfo {
  std::string name;
  std::string description;
  SuiteResult (*run)(const VerifyOptions&);
  std::size_t (*expected_rows)(const VerifyOptions&);
};

/// closed-forms, certificates, multiclass-bounds, inequalities (in that order).
const std::vector<SuiteInfo>& verification_registry();

SuiteResult verify_closed_forms(const VerifyOptions& opt);
SuiteResult verify_certificates(const VerifyOptions& opt);
SuiteResult verify_multiclass_bounds(const VerifyOptions& opt);
SuiteResult verify_inequalities(const VerifyOptions& opt);

/// Runs the named suites (all when empty).
VerifyResult run_verification(const VerifyOptions& opt,
                              const std::vector<std::string>& suites = {});

}  // namespace rrl

#endif  // RRL_VERIFICATION_HPP
