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

#include <cmath>
#include <sstream>

#include "rrl/data.hpp"
#include "rrl/report.hpp"
#include "rrl/svg.hpp"
#include "rrl/sweep.hpp"

using namespace rrl;

namespace {

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

SweepConfig tiny_config() {
  SweepConfig c;
  c.hidden = {8};
  c.lambdas = {0.0, 0.1, 1.0};
  c.seeds = {1, 2};
  AttackConfig f;
  f.kind = AttackKind::fgsm;
  AttackConfig df;
  df.kind = AttackKind::deepfool;
  c.attacks = {f, df};
  c.baseline.epochs = 3;
  c.finetune.epochs = 2;
  c.eval_samples = 20;
  c.cert_samples = 10;
  return c;
}

struct TinySweep : ::testing::Test {
  static void SetUpTestSuite() {
    auto [tr, te] = split(synth_tsipras(300, 5, 0.8, 2), 0.8, 1);
    train = new Dataset(std::move(tr));
    test = new Dataset(std::move(te));
    cfg = new SweepConfig(tiny_config());
    result = new SweepResult(run_sweep(*cfg, *train, *test));
  }
  static void TearDownTestSuite() {
    delete train;
    delete test;
    delete cfg;
    delete result;
  }
  static Dataset* train;
  static Dataset* test;
  static SweepConfig* cfg;
  static SweepResult* result;
};
Dataset* TinySweep::train = nullptr;
Dataset* TinySweep::test = nullptr;
SweepConfig* TinySweep::cfg = nullptr;
SweepResult* TinySweep::result = nullptr;

}  // namespace

TEST(Sweep, Percentiles) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2);
  EXPECT_DOUBLE_EQ(median({1, 2, 3, 4}), 2.5);
  EXPECT_DOUBLE_EQ(percentile({0, 10}, 0.9), 9);
  EXPECT_TRUE(std::isnan(percentile({}, 0.5)));
}

TEST(Sweep, ValidateRejectsBadGrids) {
  SweepConfig c = tiny_config();
  c.lambdas = {0.1, 0.1};
  EXPECT_THROW(c.validate(2), std::invalid_argument);
  c = tiny_config();
  c.kinds = {RegularizerKind::curvature};
  EXPECT_THROW(c.validate(10), std::invalid_argument);
  c = tiny_config();
  c.seeds.clear();
  EXPECT_THROW(c.validate(2), std::invalid_argument);
  c = tiny_config();
  c.kinds = {RegularizerKind::none};
  EXPECT_THROW(c.validate(2), std::invalid_argument);
}

TEST_F(TinySweep, RunCountAndOrder) {
  const std::size_t kinds = cfg->kinds.size();
  ASSERT_EQ(result->runs.size(), kinds * 3 * 2);
  EXPECT_EQ(result->baselines.size(), 2u);
  for (std::size_t i = 1; i < result->runs.size(); ++i) {
    const RunRecord &a = result->runs[i - 1], &b = result->runs[i];
    EXPECT_TRUE(std::tie(a.kind, a.lambda, a.seed) < std::tie(b.kind, b.lambda, b.seed));
  }
}

TEST_F(TinySweep, LambdaZeroIsOneRunPerSeed) {
  std::vector<const RunRecord*> zero;
  for (const RunRecord& r : result->runs)
    if (r.lambda == 0.0 && r.seed == 1) zero.push_back(&r);
  ASSERT_EQ(zero.size(), cfg->kinds.size());
  for (const RunRecord* r : zero) {
    EXPECT_EQ(r->model_id, zero.front()->model_id);
    EXPECT_DOUBLE_EQ(r->test_acc, zero.front()->test_acc);
    EXPECT_TRUE(r->shared);
  }
}

TEST_F(TinySweep, MeansAreRecomputableFromRuns) {
  const auto again = average_runs(*cfg, result->runs);
  ASSERT_EQ(again.size(), result->means.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    EXPECT_DOUBLE_EQ(again[i].clean_acc, result->means[i].clean_acc);
    EXPECT_EQ(again[i].n_seeds + again[i].n_divergent, 2u);
  }
  const MeanRecord* m = find_mean(result->means, RegularizerKind::jacobian, 0.1,
                                  AttackKind::deepfool);
  ASSERT_NE(m, nullptr);
  EXPECT_GT(m->mean_min_l2, 0.0);
  EXPECT_EQ(find_mean(result->means, RegularizerKind::jacobian, 0.5, AttackKind::fgsm), nullptr);
}

TEST_F(TinySweep, IsDeterministic) {
  SweepConfig c = *cfg;
  c.jobs = 3;
  const SweepResult again = run_sweep(c, *train, *test);
  ASSERT_EQ(again.runs.size(), result->runs.size());
  for (std::size_t i = 0; i < again.runs.size(); ++i) {
    EXPECT_EQ(again.runs[i].model_id, result->runs[i].model_id);
    EXPECT_DOUBLE_EQ(again.runs[i].final_objective, result->runs[i].final_objective);
    EXPECT_DOUBLE_EQ(again.runs[i].attacks[1].mean_min_l2, result->runs[i].attacks[1].mean_min_l2);
  }
}

TEST_F(TinySweep, MetricsCsvRowCount) {
  std::ostringstream os;
  write_metrics_csv(os, result->runs);
  std::size_t diverged = 0;
  for (const RunRecord& r : result->runs) diverged += r.diverged;
  EXPECT_EQ(count_lines(os.str()), 2 + (result->runs.size() - diverged) * cfg->attacks.size());
  EXPECT_EQ(os.str().rfind("#schema=rrl.metrics/1\nmodel_id,seed,reg_kind,lambda,attack,", 0), 0u);
}

TEST_F(TinySweep, ChartsHaveOneSeriesPerKind) {
  const auto charts = sweep_charts(*cfg, result->means);
  ASSERT_EQ(charts.size(), 4u);  // fgsm acc, deepfool mean/median, clean acc
  for (const auto& [stem, chart] : charts) {
    EXPECT_EQ(chart.series.size(), cfg->kinds.size()) << stem;
    EXPECT_EQ(chart.categories.size(), 3u);
    EXPECT_EQ(render_line_chart(chart), render_line_chart(chart));
  }
}

TEST(Sweep, StabilityRule) {
  std::vector<MeanRecord> means;
  auto add = [&](RegularizerKind k, double l, double acc, std::size_t div) {
    MeanRecord m;
    m.kind = k;
    m.lambda = l;
    m.clean_acc = acc;
    m.n_seeds = 5 - div;
    m.n_divergent = div;
    means.push_back(m);
  };
  add(RegularizerKind::jacobian, 0, 0.99, 0);
  add(RegularizerKind::jacobian, 1, 0.95, 0);
  add(RegularizerKind::jacobian, 3, 0.93, 0);
  add(RegularizerKind::curvature, 0, 0.99, 0);
  add(RegularizerKind::curvature, 1, 0.98, 0);
  add(RegularizerKind::curvature, 3, 0.99, 1);
  EXPECT_TRUE(is_stable(means, RegularizerKind::jacobian, 1));
  EXPECT_FALSE(is_stable(means, RegularizerKind::jacobian, 3));  // accuracy drop 0.06
  EXPECT_FALSE(is_stable(means, RegularizerKind::curvature, 3));  // a seed diverged
  SweepConfig c;
  c.kinds = {RegularizerKind::jacobian, RegularizerKind::curvature};
  c.lambdas = {0, 1, 3};
  EXPECT_DOUBLE_EQ(largest_mutually_stable_lambda(c, means), 1.0);
}

TEST(Report, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  EXPECT_EQ(format_double(NAN), "nan");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"x\""), "\"say \"\"x\"\"\"");
}

TEST(Report, EmptyCertificateCsvIsHeaderOnly) {
  std::ostringstream os;
  write_certificates_csv(os, {});
  EXPECT_EQ(count_lines(os.str()), 2u);
}

TEST(Report, ManifestJson) {
  RunManifest m;
  m.command = "train";
  m.seeds = {1, 2};
  m.data_checksums["x"] = "00";
  m.timings["total"] = 1.5;
  const auto j = m.to_json();
  EXPECT_EQ(j["schema"], "rrl.manifest/1");
  EXPECT_EQ(j["version"], kToolVersion);
  EXPECT_EQ(j["seeds"].size(), 2u);
}

TEST(Svg, WellFormedAndEscaped) {
  LineChart c;
  c.title = "a < b & c";
  c.categories = {"0", "0.1", "1"};
  c.series = {{"jacobian", {1.0, NAN, 2.0}}, {"flat", {0.5, 0.5, 0.5}}};
  const std::string svg = render_line_chart(c);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("a &lt; b &amp; c"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(xml_escape("\"'"), "&quot;&apos;");
}
