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


#include <gtest/gtest.h>

#include "rrl/verification.hpp"

using namespace rrl;

namespace {

VerifyOptions quick() {
  VerifyOptions o;
  o.networks = 12;
  o.binary_fixtures = 20;
  o.multiclass_fixtures = 40;
  o.fuzz = 2000;
  o.restarts = 100;
  return o;
}

}  // namespace

TEST(Verification, RegistryListsFourSuites) {
  const auto& reg = verification_registry();
  ASSERT_EQ(reg.size(), 4u);
  EXPECT_EQ(reg[0].name, "closed-forms");
  EXPECT_EQ(reg[1].name, "certificates");
  EXPECT_EQ(reg[2].name, "multiclass-bounds");
  EXPECT_EQ(reg[3].name, "inequalities");
}

TEST(Verification, QuickRunPassesWithExpectedRowCounts) {
  const VerifyOptions o = quick();
  const VerifyResult r = run_verification(o);
  ASSERT_EQ(r.suites.size(), 4u);
  for (std::size_t i = 0; i < r.suites.size(); ++i) {
    EXPECT_TRUE(r.suites[i].pass()) << r.suites[i].name;
    EXPECT_EQ(r.suites[i].rows.size(), verification_registry()[i].expected_rows(o))
        << r.suites[i].name;
  }
  EXPECT_TRUE(r.pass());
}

TEST(Verification, SuiteSelection) {
  const VerifyResult r = run_verification(quick(), {"inequalities"});
  ASSERT_EQ(r.suites.size(), 1u);
  EXPECT_EQ(r.suites[0].name, "inequalities");
  EXPECT_THROW(run_verification(quick(), {"nope"}), std::invalid_argument);
}

TEST(Verification, FaultNames) {
  for (Fault f : all_faults()) EXPECT_EQ(parse_fault(to_string(f)), f);
  EXPECT_THROW(parse_fault("typo"), std::invalid_argument);
}

// Every injected fault must be caught by the suite that owns the formula.
struct FaultCase {
  Fault fault;
  const char* suite;
};

class InjectedFault : public ::testing::TestWithParam<FaultCase> {};

TEST_P(InjectedFault, IsDetected) {
  VerifyOptions o = quick();
  o.fault = GetParam().fault;
  const VerifyResult r = run_verification(o, {GetParam().suite});
  EXPECT_FALSE(r.pass()) << to_string(o.fault);
  EXPECT_GT(r.failures(), 0u);
}

INSTANTIATE_TEST_SUITE_P(
    Mutations, InjectedFault,
    ::testing::Values(FaultCase{Fault::r2_sign, "certificates"},
                      FaultCase{Fault::r2_sign, "inequalities"},
                      FaultCase{Fault::grad_sign, "closed-forms"},
                      FaultCase{Fault::hessian_scale, "closed-forms"},
                      FaultCase{Fault::mc_unscaled, "multiclass-bounds"},
                      FaultCase{Fault::chain_bound, "inequalities"}),
    [](const auto& info) {
      std::string n = to_string(info.param.fault) + "_" + info.param.suite;
      for (char& c : n)
        if (c == '-') c = '_';
      return n;
    });
