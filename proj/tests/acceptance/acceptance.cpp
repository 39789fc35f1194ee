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

// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
//
// Criteria listed with --expect-fail are known failures (see README); they
// still print FAIL but do not fail the process. A listed criterion that
// passes is reported as XPASS and does fail it, so the list stays honest.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <CLI11.hpp>

#include "rrl/config.hpp"
#include "rrl/experiments.hpp"
#include "rrl/report.hpp"
#include "rrl/sweep.hpp"
#include "rrl/verification.hpp"

namespace fs = std::filesystem;
using namespace rrl;

namespace {

// Pinned tolerances.
constexpr double kSuiteSeconds = 120.0;       // criteria 1-4, each
constexpr double kSymmetryRatio = 1e-3;       // ||v+ + v-|| / ||v+ - v-||
constexpr double kEquivalenceRel = 1e-4;      // nu and CE
constexpr double kFlowDivergence = 1e-6;
constexpr int kFlowSteps = 1000;
constexpr double kFlowStep = 1e-3;
constexpr double kAgreementRel = 0.15;        // criteria 7 and 9
constexpr double kSweepCpuSeconds = 1800.0;   // criterion 7
constexpr std::size_t kMinGridPoints = 5;
constexpr std::size_t kBinarySeeds = 5;
constexpr std::size_t kMulticlassSeeds = 3;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path source_dir;
  fs::path cli;
  fs::path out;
  std::size_t jobs = 1;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

Outcome suite_outcome(const std::string& suite, const std::function<std::string(const SuiteResult&)>& extra = {}) {
  VerifyOptions opt;
  const VerifyResult res = run_verification(opt, {suite});
  const SuiteResult& s = res.suites.at(0);
  double worst = 0.0;
  for (const OracleReport& r : s.rows)
    if (r.tolerance > 0.0) worst = std::max(worst, r.rel_error / r.tolerance);
  Outcome o;
  o.pass = s.pass() && s.seconds < kSuiteSeconds;
  o.detail = std::to_string(s.rows.size()) + " checks, " + std::to_string(s.failures()) +
             " failures, worst error/tolerance " + fmt(worst) + ", " + fmt(s.seconds) + " s";
  if (extra) o.detail += ", " + extra(s);
  return o;
}

Outcome criterion_closed_forms(const Context&) {
  return suite_outcome("closed-forms", [](const SuiteResult&) {
    return std::to_string(VerifyOptions{}.networks) + " networks";
  });
}

Outcome criterion_certificates(const Context&) { return suite_outcome("certificates"); }

Outcome criterion_multiclass(const Context&) {
  const VerifyOptions opt;
  Outcome o = suite_outcome("multiclass-bounds");
  o.pass = o.pass && opt.multiclass_fixtures >= 1000;
  o.detail += ", " + std::to_string(opt.multiclass_fixtures) + " fixtures";
  return o;
}

Outcome criterion_inequalities(const Context&) {
  const VerifyOptions opt;
  Outcome o = suite_outcome("inequalities");
  o.pass = o.pass && opt.fuzz >= 100000;
  o.detail += ", " + std::to_string(opt.fuzz) + " fuzz fixtures per inequality";
  return o;
}

Outcome criterion_equivalence(const Context&) {
  Outcome o{true, {}};
  double worst_sym = 0.0, worst_nu = 0.0, worst_ce = 0.0;
  const double lambdas[] = {0.01, 0.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const FeatureProblem prob = random_feature_problem(200, 5 + seed % 4, 8 + 2 * seed, seed);
    const double lambda = lambdas[seed % 3];
    const EquivalenceRecord r = final_layer_equivalence(prob.features, prob.labels, lambda);
    const double sym = r.sum_norm / r.diff_norm;
    worst_sym = std::max(worst_sym, sym);
    worst_nu = std::max(worst_nu, r.nu_rel_gap);
    worst_ce = std::max(worst_ce, r.ce_rel_gap);
    o.pass = o.pass && r.cross_lipschitz.converged && r.lipschitz.converged &&
             sym <= kSymmetryRatio && r.nu_rel_gap <= kEquivalenceRel &&
             r.ce_rel_gap <= kEquivalenceRel;
  }
  o.detail = "10 problems, worst ||v+ + v-||/||v+ - v-|| " + fmt(worst_sym) + ", nu gap " +
             fmt(worst_nu) + ", CE gap " + fmt(worst_ce);
  return o;
}

Outcome criterion_gradient_flow(const Context&) {
  struct Case {
    std::size_t dim;
    double a, eta, lambda;
  };
  const Case cases[] = {{5, 0.2, 0.5, 0.1}, {10, 0.1, 0.5, 0.1}, {20, 0.05, 1.0, 1.0}};
  Outcome o{true, {}};
  double worst = 0.0;
  for (const Case& c : cases) {
    const GradientFlowRecord r =
        gradient_flow_experiment(c.dim, c.a, c.eta, c.lambda, kFlowStep, kFlowSteps);
    worst = std::max(worst, r.max_divergence);
    o.pass = o.pass && r.max_divergence <= kFlowDivergence;
  }
  o.detail = "3 Bayes-form starts, " + std::to_string(kFlowSteps) +
             " steps, worst max divergence " + fmt(worst);
  return o;
}

// ---------------------------------------------------------------------------
// Sweeps (shared by criteria 7 and 8).

struct SweepRun {
  SweepConfig cfg;
  SweepResult result;
  double cpu = 0.0;
  std::string error;
};

SweepRun run_config_sweep(const Context& ctx, const std::string& name, std::size_t min_seeds) {
  SweepRun run;
  try {
    RunConfig rc = load_config(ctx.source_dir / "configs" / (name + ".json"));
    for (std::string* p : {&rc.data.images, &rc.data.labels})
      if (!p->empty() && fs::path(*p).is_relative()) *p = (ctx.source_dir / *p).string();
    const LoadedData data = load_data(rc.data);
    run.cfg = resolve_sweep(rc, data);
    run.cfg.jobs = ctx.jobs;
    if (run.cfg.seeds.size() < min_seeds) throw std::runtime_error("config has too few seeds");
    const double c0 = cpu_seconds();
    run.result = run_sweep(run.cfg, data.train, data.test, [&](const RunRecord& r) {
      std::cerr << "  " << r.model_id << (r.diverged ? " diverged" : "") << '\n';
    });
    run.cpu = cpu_seconds() - c0;
    write_sweep_outputs(ctx.out / name, run.cfg, run.result);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  return run;
}

const SweepRun& binary_sweep(const Context& ctx) {
  static const SweepRun run = run_config_sweep(ctx, "mnist_7v1", kBinarySeeds);
  return run;
}

double deepfool_l2(const SweepRun& s, RegularizerKind k, double lambda) {
  const MeanRecord* m = find_mean(s.result.means, k, lambda, AttackKind::deepfool);
  return m ? m->mean_min_l2 : std::nan("");
}

double pgd_acc(const SweepRun& s, RegularizerKind k, double lambda) {
  const MeanRecord* m = find_mean(s.result.means, k, lambda, AttackKind::pgd);
  return m ? m->robust_acc : std::nan("");
}

// Jacobian vs cross-Lipschitz agreement at every lambda > 0 where both are
// stable; `with_pgd` adds PGD robust accuracy to DeepFool mean l2.
Outcome agreement(const SweepRun& s, bool with_pgd) {
  Outcome o{true, {}};
  std::size_t compared = 0;
  double worst_df = 0.0, worst_pgd = 0.0;
  std::ostringstream cells;
  for (double lambda : s.cfg.lambdas) {
    if (lambda <= 0.0) continue;
    if (!is_stable(s.result.means, RegularizerKind::jacobian, lambda) ||
        !is_stable(s.result.means, RegularizerKind::cross_lipschitz, lambda))
      continue;
    ++compared;
    const double df = rel_diff(deepfool_l2(s, RegularizerKind::jacobian, lambda),
                               deepfool_l2(s, RegularizerKind::cross_lipschitz, lambda));
    worst_df = std::max(worst_df, df);
    o.pass = o.pass && df <= kAgreementRel;
    cells << " lambda=" << fmt(lambda) << ":df " << fmt(df);
    if (with_pgd) {
      const double pg = rel_diff(pgd_acc(s, RegularizerKind::jacobian, lambda),
                                 pgd_acc(s, RegularizerKind::cross_lipschitz, lambda));
      worst_pgd = std::max(worst_pgd, pg);
      o.pass = o.pass && pg <= kAgreementRel;
      cells << "/pgd " << fmt(pg);
    }
  }
  o.pass = o.pass && compared > 0;
  o.detail = std::to_string(compared) + " stable lambdas compared, worst DeepFool l2 gap " +
             fmt(worst_df);
  if (with_pgd) o.detail += ", worst PGD accuracy gap " + fmt(worst_pgd);
  o.detail += " [" + cells.str().substr(cells.str().empty() ? 0 : 1) + "]";
  return o;
}

Outcome criterion_binary_agreement(const Context& ctx) {
  const SweepRun& s = binary_sweep(ctx);
  if (!s.error.empty()) return {false, "sweep failed: " + s.error};
  Outcome o = agreement(s, false);
  const bool grid_ok = s.cfg.lambdas.size() >= kMinGridPoints && s.cfg.seeds.size() >= kBinarySeeds;
  o.pass = o.pass && grid_ok && s.cpu <= kSweepCpuSeconds;
  o.detail += ", " + std::to_string(s.cfg.lambdas.size()) + " lambdas x " +
              std::to_string(s.cfg.seeds.size()) + " seeds, sweep CPU " + fmt(s.cpu / 60.0) +
              " min";
  return o;
}

Outcome criterion_curvature_best(const Context& ctx) {
  const SweepRun& s = binary_sweep(ctx);
  if (!s.error.empty()) return {false, "sweep failed: " + s.error};
  const double lambda = largest_mutually_stable_lambda(s.cfg, s.result.means);
  if (lambda <= 0.0) return {false, "no mutually stable lambda > 0"};
  Outcome o{true, {}};
  const double df_curv = deepfool_l2(s, RegularizerKind::curvature, lambda);
  const double pgd_curv = pgd_acc(s, RegularizerKind::curvature, lambda);
  const double df_base = deepfool_l2(s, RegularizerKind::curvature, 0.0);
  const double pgd_base = pgd_acc(s, RegularizerKind::curvature, 0.0);
  std::ostringstream os;
  os << "lambda*=" << fmt(lambda) << "; baseline df " << fmt(df_base) << " pgd " << fmt(pgd_base);
  for (RegularizerKind k : s.cfg.kinds) {
    const double df = deepfool_l2(s, k, lambda);
    const double pg = pgd_acc(s, k, lambda);
    os << "; " << to_string(k) << " df " << fmt(df) << " pgd " << fmt(pg);
    if (!(df > df_base && pg > pgd_base)) {
      o.pass = false;
      os << " (not above baseline)";
    }
    if (k != RegularizerKind::curvature && !(df_curv >= df && pgd_curv >= pg)) {
      o.pass = false;
      os << " (beats curvature)";
    }
  }
  o.detail = os.str();
  return o;
}

Outcome criterion_multiclass_sweep(const Context& ctx) {
  const SweepRun s = run_config_sweep(ctx, "mnist_10class", kMulticlassSeeds);
  if (!s.error.empty()) return {false, "sweep failed: " + s.error};
  Outcome o = agreement(s, true);

  // The largest lambda of the grid must diverge explicitly on every seed.
  double extreme = 0.0;
  for (double l : s.cfg.lambdas) extreme = std::max(extreme, l);
  std::size_t explicit_div = 0, extreme_runs = 0, silent_nan = 0;
  for (const RunRecord& r : s.result.runs) {
    if (r.shared) continue;
    if (r.lambda == extreme) {
      ++extreme_runs;
      explicit_div += r.diverged && !r.divergence.empty();
    }
    if (r.diverged) continue;
    bool finite = std::isfinite(r.train_acc) && std::isfinite(r.test_acc) &&
                  std::isfinite(r.final_objective);
    for (const AttackMetrics& m : r.attacks) {
      finite = finite && std::isfinite(m.clean_acc);
      if (m.config.kind == AttackKind::pgd || m.config.kind == AttackKind::fgsm)
        finite = finite && std::isfinite(m.robust_acc);
      if (m.config.kind == AttackKind::deepfool && m.n_success > 0)
        finite = finite && std::isfinite(m.mean_min_l2);
    }
    silent_nan += !finite;
  }
  const bool div_ok = extreme_runs > 0 && explicit_div == extreme_runs && silent_nan == 0;
  o.pass = o.pass && div_ok;
  o.detail += "; lambda=" + fmt(extreme) + ": " + std::to_string(explicit_div) + "/" +
              std::to_string(extreme_runs) + " runs diverged explicitly, " +
              std::to_string(silent_nan) + " runs with non-finite metrics";
  return o;
}

int run_cli(const Context& ctx, const std::string& args) {
  const std::string cmd = "\"" + ctx.cli.string() + "\" verify --out \"" +
                          (ctx.out / "verify").string() + "\" " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

Outcome criterion_verify_command(const Context& ctx) {
  const int clean = run_cli(ctx, "");
  const int faulty = run_cli(ctx, "--inject-fault r2-sign --suite certificates");
  return {clean == 0 && faulty == 1, "rrl verify exit " + std::to_string(clean) +
                                         ", with an injected fault exit " +
                                         std::to_string(faulty)};
}

std::set<int> id_set(const std::string& list) {
  std::set<int> ids;
  if (list.find_first_not_of(" ") == std::string::npos) return ids;
  for (double v : parse_double_list(list)) ids.insert(static_cast<int>(v));
  return ids;
}

struct Criterion {
  int id;
  std::string title;
  Outcome (*run)(const Context&);
};

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  CLI::App app{"rrl acceptance criteria"};
  std::string source, cli, out, expect_fail, only;
  app.add_option("--source-dir", source)->required();
  app.add_option("--cli", cli)->required();
  app.add_option("--out", out)->required();
  app.add_option("--jobs", ctx.jobs);
  app.add_option("--expect-fail", expect_fail, "known failing criteria, comma-separated");
  app.add_option("--only", only, "run only these criteria, comma-separated");
  CLI11_PARSE(app, argc, argv);
  ctx.source_dir = source;
  ctx.cli = cli;
  ctx.out = out;
  fs::create_directories(ctx.out);

  const std::vector<Criterion> criteria = {
      {1, "closed-form gradient/Hessian correctness", criterion_closed_forms},
      {2, "binary certificate exactness", criterion_certificates},
      {3, "multi-class bound soundness", criterion_multiclass},
      {4, "inequality suites", criterion_inequalities},
      {5, "final-layer nu^2/2 vs mu^2 equivalence", criterion_equivalence},
      {6, "gradient-flow construction", criterion_gradient_flow},
      {7, "7-vs-1: Jacobian vs cross-Lipschitz DeepFool agreement", criterion_binary_agreement},
      {8, "7-vs-1: curvature best, all above baseline", criterion_curvature_best},
      {9, "10-class: agreement and explicit divergence", criterion_multiclass_sweep},
      {10, "verify command", criterion_verify_command},
  };
  const std::set<int> xfail = id_set(expect_fail);
  const std::set<int> selected = id_set(only);

  std::ofstream report(ctx.out / "acceptance.csv");
  report << "criterion,status,seconds,detail\n";
  int unexpected = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool known = xfail.count(c.id) > 0;
    std::string status = o.pass ? "PASS" : "FAIL";
    if (known) status = o.pass ? "XPASS" : "FAIL (known)";
    if (o.pass == known) ++unexpected;
    std::cout << "criterion " << c.id << ": " << status << " - " << c.title << " - " << o.detail
              << " (" << fmt(secs) << " s)" << std::endl;
    report << c.id << ',' << csv_escape(status) << ',' << secs << ',' << csv_escape(o.detail)
           << '\n';
  }
  std::cout << (unexpected ? "acceptance: unexpected results\n" : "acceptance: as expected\n");
  return unexpected ? 1 : 0;
}
