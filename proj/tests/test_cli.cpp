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


// End-to-end checks of the rrl binary: exit codes, outputs, determinism.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrl/serialize.hpp"
#include "rrl/verification.hpp"

#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "rrl_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(RRL_CLI) + " " + args + " >" + (kWork / "stdout.txt").string() +
                          " 2>" + (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

using Row = std::map<std::string, std::string>;

// Minimal reader for the tool's CSVs (schema line, header, unquoted fields).
std::vector<Row> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("#schema=rrl.", 0), 0u) << p;
  std::getline(in, line);
  std::vector<std::string> cols;
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) cols.push_back(c);
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    Row r;
    std::stringstream ls(line);
    std::size_t i = 0;
    for (std::string f; std::getline(ls, f, ',') && i < cols.size(); ++i) r[cols[i]] = f;
    rows.push_back(r);
  }
  return rows;
}

const char* kSynthetic = R"({
  "data": {"synthetic": {"samples": 300, "dim": 6, "eta": 0.8, "seed": 4}},
  "model": {"hidden": [10]},
  "train": {"epochs": 3, "seed": 2},
  "finetune": {"epochs": 2},
  "sweep": {"kinds": ["jacobian", "curvature"], "lambdas": [0], "seeds": [1, 2],
            "eval_samples": 15, "cert_samples": 10},
  "attacks": [{"kind": "fgsm"}, {"kind": "deepfool"}]
})";

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    write(kWork / "syn.json", kSynthetic);
    rrl::save_network(rrl::testing::reference_net(), kWork / "ref.rrlnet");
    write(kWork / "ref.csv", "0,0.5,0\n");
    write(kWork / "empty.csv", "# nothing\n");
  }
  static std::string w(const std::string& name) { return (kWork / name).string(); }
};

}  // namespace

TEST_F(Cli, TrainWritesOutputsAndIsDeterministic) {
  ASSERT_EQ(run("train --config " + w("syn.json") + " --out " + w("t1")), 0) << slurp(w("stderr.txt"));
  for (const char* f : {"weights.rrlnet", "trace.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(kWork / "t1" / f)) << f;
  ASSERT_EQ(run("train --config " + w("syn.json") + " --out " + w("t2")), 0);
  EXPECT_EQ(rrl::file_checksum(kWork / "t1" / "weights.rrlnet"),
            rrl::file_checksum(kWork / "t2" / "weights.rrlnet"));
  EXPECT_EQ(read_csv(kWork / "t1" / "trace.csv").size(), 3u);
  const auto m = nlohmann::json::parse(slurp(kWork / "t1" / "manifest.json"));
  EXPECT_EQ(m["command"], "train");
  EXPECT_TRUE(m["timings_seconds"].contains("total"));
}

TEST_F(Cli, OutputRootFromEnvironment) {
  ::setenv("RRL_OUT_DIR", w("envroot").c_str(), 1);
  EXPECT_EQ(run("train --config " + w("syn.json")), 0);
  ::unsetenv("RRL_OUT_DIR");
  EXPECT_TRUE(fs::exists(kWork / "envroot" / "train" / "weights.rrlnet"));
}

TEST_F(Cli, ConfigErrorsExitWithTwo) {
  write(kWork / "bad.json", "{\n  \"train\": {\"epochs\": 3,}\n}\n");
  EXPECT_EQ(run("train --config " + w("bad.json") + " --out " + w("bad")), 2);
  EXPECT_NE(slurp(w("stderr.txt")).find("line 2"), std::string::npos) << slurp(w("stderr.txt"));
  EXPECT_EQ(run("train --config " + w("syn.json") + " --reg nope --out " + w("bad")), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, MissingDataExitsWithThree) {
  EXPECT_EQ(run("train --data-images " + w("none-i") + " --data-labels " + w("none-l") +
                " --out " + w("io")),
            3);
}

TEST_F(Cli, DivergenceExitsWithFour) {
  write(kWork / "div.json", R"({
    "data": {"synthetic": {"samples": 200, "dim": 6}},
    "model": {"hidden": [10]},
    "train": {"epochs": 3, "learning_rate": 1000, "reg": "jacobian", "lambda": 1e6}
  })");
  EXPECT_EQ(run("train --config " + w("div.json") + " --out " + w("div")), 4);
  EXPECT_NE(slurp(w("stderr.txt")).find("diverged"), std::string::npos);
  EXPECT_TRUE(fs::exists(kWork / "div" / "manifest.json"));
}

TEST_F(Cli, CertifyReferenceNetwork) {
  ASSERT_EQ(run("certify --weights " + w("ref.rrlnet") + " --inputs-csv " + w("ref.csv") +
                " --split all --epsilon 0.1 --out " + w("cert")),
            0)
      << slurp(w("stderr.txt"));
  const auto rows = read_csv(kWork / "cert" / "certificates.csv");
  ASSERT_EQ(rows.size(), 3u);  // sample + p50 + p90
  EXPECT_EQ(rows[0].at("status"), "certified");
  EXPECT_NEAR(std::stod(rows[0].at("r2_analytic")), 0.51349, 1e-5);
  EXPECT_NEAR(std::stod(rows[0].at("eta_star")), 0.370982, 1e-6);
  EXPECT_EQ(rows[1].at("sample_id"), "p50");
}

TEST_F(Cli, CertifyWithZeroEpsilonReportsTheLoss) {
  ASSERT_EQ(run("certify --weights " + w("ref.rrlnet") + " --inputs-csv " + w("ref.csv") +
                " --split all --epsilon 0 --out " + w("cert0")),
            0);
  const auto rows = read_csv(kWork / "cert0" / "certificates.csv");
  EXPECT_EQ(rows[0].at("eta_star"), rows[0].at("loss"));
}

TEST_F(Cli, CertifyEmptyDatasetIsHeaderOnly) {
  ASSERT_EQ(run("certify --weights " + w("ref.rrlnet") + " --inputs-csv " + w("empty.csv") +
                " --split all --out " + w("cert_empty")),
            0)
      << slurp(w("stderr.txt"));
  EXPECT_TRUE(read_csv(kWork / "cert_empty" / "certificates.csv").empty());
}

TEST_F(Cli, CertifyMisclassifiedRow) {
  write(kWork / "wrong.csv", "1,0.5,0\n");
  ASSERT_EQ(run("certify --weights " + w("ref.rrlnet") + " --inputs-csv " + w("wrong.csv") +
                " --split all --out " + w("cert_wrong")),
            0);
  const auto rows = read_csv(kWork / "cert_wrong" / "certificates.csv");
  EXPECT_EQ(rows[0].at("status"), "uncertifiable");
  EXPECT_EQ(rows[0].at("r2_analytic"), "nan");
}

TEST_F(Cli, AttackCommand) {
  ASSERT_EQ(run("attack --weights " + w("ref.rrlnet") + " --inputs-csv " + w("ref.csv") +
                " --split all --attack deepfool --out " + w("atk")),
            0)
      << slurp(w("stderr.txt"));
  const auto rows = read_csv(kWork / "atk" / "metrics.csv");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(std::stod(rows[0].at("mean_min_l2")), 0.51, 1e-9);
}

TEST_F(Cli, SweepWithOnlyTheBaselineLambda) {
  ASSERT_EQ(run("sweep --config " + w("syn.json") + " --out " + w("sw") + " -q"), 0)
      << slurp(w("stderr.txt"));
  const fs::path d = kWork / "sw";
  // kinds x lambdas x seeds x attacks
  EXPECT_EQ(read_csv(d / "metrics.csv").size(), 2u * 1 * 2 * 2);
  EXPECT_EQ(read_csv(d / "runs.csv").size(), 4u);
  for (const char* f : {"metrics_mean.csv", "baselines.csv", "certificates.csv", "manifest.json",
                        "plots/fgsm_robust_acc.svg", "plots/deepfool_mean_min_l2.svg",
                        "plots/clean_acc.svg"})
    EXPECT_TRUE(fs::exists(d / f)) << f;
  // With lambda = 0 only, every kind shows the same baseline value.
  const auto means = read_csv(d / "metrics_mean.csv");
  ASSERT_FALSE(means.empty());
  for (const Row& r : means) {
    if (r.at("attack") == means[0].at("attack")) {
      EXPECT_EQ(r.at("clean_acc"), means[0].at("clean_acc"));
    }
  }
  const int xml = std::system(("python3 -c \"import sys,xml.dom.minidom as m;"
                               "[m.parse(f) for f in sys.argv[1:]]\" " +
                               (d / "plots" / "*.svg").string() + " 2>/dev/null")
                                  .c_str());
  EXPECT_EQ(xml, 0) << "SVG is not well-formed XML";
}

TEST_F(Cli, SweepGridOverride) {
  ASSERT_EQ(run("sweep --config " + w("syn.json") + " --lambda-grid 0,0.5 --reg jacobian " +
                "--seed 3 --attack fgsm --epsilon 0.2 --jobs 2 --out " + w("sw2") + " -q"),
            0)
      << slurp(w("stderr.txt"));
  const auto rows = read_csv(kWork / "sw2" / "metrics.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].at("lambda"), "0.5");
  EXPECT_EQ(rows[1].at("epsilon"), "0.2");
  EXPECT_EQ(rows[1].at("seed"), "3");
}

TEST_F(Cli, VerifySuiteAndInjectedFault) {
  ASSERT_EQ(run("verify --suite inequalities --out " + w("ver")), 0) << slurp(w("stderr.txt"));
  const auto rows = read_csv(kWork / "ver" / "oracle_report.csv");
  EXPECT_EQ(rows.size(), rrl::verification_registry()[3].expected_rows(rrl::VerifyOptions{}));
  EXPECT_EQ(run("verify --suite inequalities --inject-fault chain-bound --out " + w("ver_f")), 1);
  EXPECT_NE(slurp(w("stderr.txt")).find("FAIL inequalities"), std::string::npos);
  EXPECT_EQ(run("verify --inject-fault nonsense --out " + w("ver_x")), 2);
}
