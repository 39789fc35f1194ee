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


// rrl: train, fine-tune, sweep, certify, attack and verify from the command line.
//
// Exit codes: 0 ok, 1 verification failure, 2 configuration error, 3 I/O
// error, 4 training divergence.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rrl/config.hpp"
#include "rrl/report.hpp"
#include "rrl/serialize.hpp"
#include "rrl/sweep.hpp"
#include "rrl/verification.hpp"

namespace fs = std::filesystem;
using namespace rrl;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kConfig = 2, kIo = 3, kDiverged = 4 };

struct Options {
  std::string config;
  std::string images;
  std::string labels;
  std::string inputs_csv;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::string lambda_grid;
  std::string reg;
  std::optional<double> lambda;
  std::string attack;
  std::optional<double> epsilon;
  std::string weights;
  std::string split = "test";
  std::string fault = "none";
  std::vector<std::string> suites;
  bool quiet = false;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path output_dir(const Options& o, const std::string& command) {
  if (!o.out.empty()) return o.out;
  if (const char* root = std::getenv("RRL_OUT_DIR"); root && *root) return fs::path(root) / command;
  return fs::path("rrl_out") / command;
}

RunConfig resolve_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.images.empty()) cfg.data.images = o.images;
  if (!o.labels.empty()) cfg.data.labels = o.labels;
  if (!o.inputs_csv.empty()) cfg.data.inputs_csv = o.inputs_csv;
  if (o.seed) {
    cfg.train.seed = *o.seed;
    cfg.finetune.seed = *o.seed;
    cfg.sweep.seeds = {*o.seed};
  }
  if (o.jobs) cfg.sweep.jobs = *o.jobs;
  if (!o.lambda_grid.empty()) {
    try {
      cfg.sweep.lambdas = parse_double_list(o.lambda_grid);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--lambda-grid: ") + e.what(), 0);
    }
  }
  if (!o.reg.empty()) {
    RegularizerKind k;
    try {
      k = parse_regularizer(o.reg);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("--reg: ") + e.what(), 0);
    }
    cfg.train.reg.kind = k;
    cfg.finetune.reg.kind = k;
    if (k != RegularizerKind::none) cfg.sweep.kinds = {k};
  }
  if (o.lambda) {
    cfg.train.reg.lambda = *o.lambda;
    cfg.finetune.reg.lambda = *o.lambda;
  }
  if (!o.attack.empty()) {
    AttackConfig a;
    try {
      a.kind = parse_attack(o.attack);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("--attack: ") + e.what(), 0);
    }
    if (o.epsilon) a.epsilon = *o.epsilon;
    cfg.attacks = {a};
  } else if (o.epsilon) {
    if (cfg.attacks.empty()) cfg.attacks = default_attacks();
    for (AttackConfig& a : cfg.attacks) a.epsilon = *o.epsilon;
  }
  return cfg;
}

/// Manifest written before any result and rewritten with timings at the end.
class ManifestWriter {
 public:
  ManifestWriter(fs::path dir, std::string command, const RunConfig& cfg)
      : dir_(std::move(dir)) {
    m_.command = std::move(command);
    m_.config = to_json(cfg);
    m_.started_at = utc_timestamp();
  }
  RunManifest& manifest() { return m_; }
  void add_data(const LoadedData& d) {
    for (const auto& [path, sum] : d.checksums) m_.data_checksums[path] = sum;
  }
  void write() { write_manifest(dir_, m_); }

 private:
  fs::path dir_;
  RunManifest m_;
};

void check_compatible(const Network& net, const Dataset& d) {
  if (d.empty()) return;
  if (net.input_dim() != d.dim())
    throw ConfigError("network input dimension " + std::to_string(net.input_dim()) +
                          " does not match the data dimension " + std::to_string(d.dim()),
                      0);
  if (net.num_classes() < d.num_classes)
    throw ConfigError("network has fewer classes than the data", 0);
}

const Dataset& pick_split(const LoadedData& data, const std::string& split) {
  if (split == "train") return data.train;
  if (split == "test") return data.test;
  return data.all;
}

void log(const Options& o, const std::string& msg) {
  if (!o.quiet) std::cerr << msg << '\n';
}

int cmd_train(const Options& o, bool is_finetune) {
  const std::string command = is_finetune ? "finetune" : "train";
  Timer total;
  RunConfig cfg = resolve_config(o);
  TrainConfig tc = is_finetune ? cfg.finetune : cfg.train;
  tc.validate();
  if (is_finetune && o.weights.empty()) throw ConfigError("finetune needs --weights", 0);

  const fs::path dir = output_dir(o, command);
  ManifestWriter mw(dir, command, cfg);
  mw.manifest().seeds = {tc.seed};
  Timer t_data;
  LoadedData data = load_data(cfg.data);
  mw.add_data(data);
  if (is_finetune) mw.manifest().data_checksums[o.weights] = hex64(file_checksum(o.weights));
  mw.manifest().timings["data"] = t_data.seconds();
  mw.write();
  if (data.train.empty()) throw ConfigError("the training split is empty", 0);

  Network init;
  if (is_finetune) {
    init = load_network(o.weights);
    check_compatible(init, data.train);
  } else {
    init = make_network(data.train.dim(), cfg.model.hidden, data.train.num_classes,
                        cfg.model.activation, cfg.model.bias, tc.seed);
  }
  if (!supports(tc.reg.kind, init.num_classes()))
    throw ConfigError(to_string(tc.reg.kind) + " is only defined for binary networks", 0);

  Timer t_train;
  TrainResult res;
  try {
    res = is_finetune ? finetune(init, data.train, tc.reg.kind, tc.reg.lambda, tc)
                      : train(init, data.train, tc);
  } catch (const DivergenceError& e) {
    mw.manifest().timings["train"] = t_train.seconds();
    mw.manifest().timings["total"] = total.seconds();
    mw.write();
    std::cerr << "diverged at epoch " << e.epoch() << ": " << e.what() << '\n';
    return kDiverged;
  }
  mw.manifest().timings["train"] = t_train.seconds();

  save_network(res.net, dir / "weights.rrlnet");
  auto trace = open_output(dir / "trace.csv");
  write_trace_csv(trace, res.trace);
  const double train_acc = accuracy(res.net, data.train);
  const double test_acc = data.test.empty() ? std::nan("") : accuracy(res.net, data.test);
  mw.manifest().timings["total"] = total.seconds();
  mw.write();
  std::cout << command << ": train_acc=" << format_double(train_acc)
            << " test_acc=" << format_double(test_acc)
            << " weights=" << hex64(file_checksum(dir / "weights.rrlnet")) << '\n';
  return kOk;
}

int cmd_sweep(const Options& o) {
  Timer total;
  RunConfig cfg = resolve_config(o);
  const fs::path dir = output_dir(o, "sweep");
  ManifestWriter mw(dir, "sweep", cfg);
  Timer t_data;
  LoadedData data = load_data(cfg.data);
  mw.add_data(data);
  mw.manifest().timings["data"] = t_data.seconds();

  SweepConfig sc = resolve_sweep(cfg, data);
  if (cfg.save_weights) sc.weights_dir = dir / "weights";
  if (data.train.empty()) throw ConfigError("the training split is empty", 0);
  mw.manifest().seeds = sc.seeds;
  mw.manifest().config["sweep"]["resolved_attacks"] = nlohmann::json::array();
  for (const AttackConfig& a : sc.attacks)
    mw.manifest().config["sweep"]["resolved_attacks"].push_back(to_json(a));
  mw.write();

  std::mutex log_mu;
  SweepResult res;
  try {
    res = run_sweep(sc, data.train, data.test, [&](const RunRecord& r) {
      std::lock_guard lock(log_mu);
      log(o, r.model_id + (r.diverged ? " diverged: " + r.divergence
                                       : " test_acc=" + format_double(r.test_acc)));
    });
  } catch (const DivergenceError& e) {
    mw.manifest().timings["total"] = total.seconds();
    mw.write();
    std::cerr << "baseline diverged: " << e.what() << '\n';
    return kDiverged;
  }
  mw.manifest().timings["sweep"] = res.seconds;

  write_sweep_outputs(dir, sc, res);
  std::size_t diverged = 0;
  for (const RunRecord& r : res.runs) diverged += r.diverged && !r.shared;
  const double stable = largest_mutually_stable_lambda(sc, res.means);
  mw.manifest().timings["total"] = total.seconds();
  mw.write();
  std::cout << "sweep: " << res.runs.size() << " runs, " << diverged
            << " diverged, largest mutually stable lambda " << format_double(stable) << '\n';
  return kOk;
}

int cmd_certify(const Options& o) {
  Timer total;
  RunConfig cfg = resolve_config(o);
  if (o.weights.empty()) throw ConfigError("certify needs --weights", 0);
  const double eps = o.epsilon.value_or(0.1);
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw ConfigError("--epsilon must be >= 0", 0);
  const fs::path dir = output_dir(o, "certify");
  ManifestWriter mw(dir, "certify", cfg);
  mw.manifest().config["certify"] = {{"epsilon", eps}, {"split", o.split}, {"weights", o.weights}};
  LoadedData data = load_data(cfg.data);
  mw.add_data(data);
  mw.manifest().data_checksums[o.weights] = hex64(file_checksum(o.weights));
  mw.write();

  const Network net = load_network(o.weights);
  const Dataset& d = pick_split(data, o.split);
  check_compatible(net, d);
  Timer t;
  std::vector<RobustnessCertificate> certs;
  certs.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) certs.push_back(certify(net, d.input(i), d.labels[i], eps));
  mw.manifest().timings["certify"] = t.seconds();
  auto f = open_output(dir / "certificates.csv");
  write_certificates_csv(f, certs);
  f.close();
  std::size_t n_cert = 0;
  for (const auto& c : certs) n_cert += c.certified();
  mw.manifest().timings["total"] = total.seconds();
  mw.write();
  std::cout << "certify: " << n_cert << " of " << certs.size() << " samples certified\n";
  return kOk;
}

int cmd_attack(const Options& o) {
  Timer total;
  RunConfig cfg = resolve_config(o);
  if (o.weights.empty()) throw ConfigError("attack needs --weights", 0);
  const fs::path dir = output_dir(o, "attack");
  ManifestWriter mw(dir, "attack", cfg);
  LoadedData data = load_data(cfg.data);
  mw.add_data(data);
  mw.manifest().data_checksums[o.weights] = hex64(file_checksum(o.weights));
  const Dataset& d = pick_split(data, o.split);
  const std::vector<AttackConfig> attacks = resolve_attacks(cfg, d);
  for (const AttackConfig& a : attacks) mw.manifest().seeds.push_back(a.seed);
  mw.write();

  const Network net = load_network(o.weights);
  check_compatible(net, d);
  auto metrics_out = open_output(dir / "metrics.csv");
  std::vector<AttackMetrics> all;
  for (const AttackConfig& a : attacks) {
    Timer t;
    AttackMetrics m = evaluate(net, d, a, true);
    mw.manifest().timings[to_string(a.kind)] = t.seconds();
    auto rows = open_output(dir / ("attack_rows_" + to_string(a.kind) + ".csv"));
    write_attack_rows_csv(rows, m);
    std::cout << "attack " << a.describe() << ": clean_acc=" << format_double(m.clean_acc)
              << " robust_acc=" << format_double(m.robust_acc) << " success=" << m.n_success
              << "/" << m.n_samples << '\n';
    all.push_back(std::move(m));
  }
  write_attack_metrics_csv(metrics_out, fs::path(o.weights).stem().string(), 0,
                           RegularizerKind::none, 0.0, all);
  mw.manifest().timings["total"] = total.seconds();
  mw.write();
  return kOk;
}

int cmd_verify(const Options& o) {
  VerifyOptions opt;
  try {
    opt.fault = parse_fault(o.fault);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("--inject-fault: ") + e.what(), 0);
  }
  if (o.seed) opt.seed = *o.seed;
  const fs::path dir = output_dir(o, "verify");
  RunManifest m;
  m.command = "verify";
  m.started_at = utc_timestamp();
  m.seeds = {opt.seed};
  m.config = {{"fault", to_string(opt.fault)},
              {"networks", opt.networks},
              {"binary_fixtures", opt.binary_fixtures},
              {"multiclass_fixtures", opt.multiclass_fixtures},
              {"fuzz", opt.fuzz},
              {"restarts", opt.restarts},
              {"margin_guard", opt.margin_guard},
              {"suites", o.suites}};
  write_manifest(dir, m);

  VerifyResult res;
  try {
    res = run_verification(opt, o.suites);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), 0);
  }
  std::vector<OracleReport> rows;
  std::vector<std::string> names;
  for (const SuiteResult& s : res.suites) {
    m.timings[s.name] = s.seconds;
    for (const OracleReport& r : s.rows) {
      rows.push_back(r);
      names.push_back(s.name);
    }
    std::cout << s.name << ": " << s.rows.size() << " rows, " << s.failures() << " failures, "
              << s.rejected_fixtures << " fixtures redrawn, " << format_double(s.seconds)
              << " s\n";
  }
  auto f = open_output(dir / "oracle_report.csv");
  write_oracle_csv(f, rows, names);
  f.close();
  write_manifest(dir, m);

  if (res.pass()) {
    std::cout << "verify: all " << res.row_count() << " checks passed\n";
    return kOk;
  }
  std::size_t listed = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].pass) continue;
    if (listed++ < 50)
      std::cerr << "FAIL " << names[i] << " " << rows[i].quantity
                << " analytic=" << format_double(rows[i].analytic)
                << " oracle=" << format_double(rows[i].oracle)
                << " rel_error=" << format_double(rows[i].rel_error)
                << " tol=" << format_double(rows[i].tolerance) << '\n';
  }
  if (listed > 50) std::cerr << "... " << listed - 50 << " more failing rows in the report\n";
  std::cout << "verify: " << res.failures() << " of " << res.row_count() << " checks failed\n";
  return kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness regularizers for piecewise-linear classifiers"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* c) {
    c->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    c->add_option("--data-images", o.images, "IDX image file");
    c->add_option("--data-labels", o.labels, "IDX label file");
    c->add_option("--inputs-csv", o.inputs_csv, "label,x1,...,xn rows instead of IDX data");
    c->add_option("--out", o.out, "output directory (default $RRL_OUT_DIR/<command>)");
    c->add_option("--seed", o.seed, "seed override");
    c->add_flag("-q,--quiet", o.quiet, "no progress on stderr");
  };
  auto model_opts = [&o](CLI::App* c) {
    c->add_option("--reg", o.reg, "none|jacobian|input-gradient|curvature|cross-lipschitz");
    c->add_option("--lambda", o.lambda, "regularization weight");
  };
  auto weights = [&o](CLI::App* c, bool required) {
    c->add_option("--weights", o.weights, "network weight file")
        ->check(CLI::ExistingFile)
        ->required(required);
  };
  auto split = [&o](CLI::App* c) {
    c->add_option("--split", o.split, "which split to evaluate")
        ->check(CLI::IsMember({"all", "train", "test"}));
  };

  auto* train_cmd = app.add_subcommand("train", "train a network from scratch");
  common(train_cmd);
  model_opts(train_cmd);

  auto* ft_cmd = app.add_subcommand("finetune", "fine-tune a trained network with a regularizer");
  common(ft_cmd);
  model_opts(ft_cmd);
  weights(ft_cmd, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "baseline -> fine-tune -> attack grid");
  common(sweep_cmd);
  sweep_cmd->add_option("--jobs", o.jobs, "parallel runs")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--lambda-grid", o.lambda_grid, "comma-separated lambdas");
  sweep_cmd->add_option("--reg", o.reg, "restrict the sweep to one regularizer");
  sweep_cmd->add_option("--attack", o.attack, "fgsm|pgd|deepfool|cw (replaces the list)");
  sweep_cmd->add_option("--epsilon", o.epsilon, "l_inf budget of the attacks");

  auto* cert_cmd = app.add_subcommand("certify", "per-sample robustness certificates");
  common(cert_cmd);
  weights(cert_cmd, true);
  split(cert_cmd);
  cert_cmd->add_option("--epsilon", o.epsilon, "l_inf ball radius for the worst-case loss");

  auto* attack_cmd = app.add_subcommand("attack", "evaluate attacks on a trained network");
  common(attack_cmd);
  weights(attack_cmd, true);
  split(attack_cmd);
  attack_cmd->add_option("--attack", o.attack, "fgsm|pgd|deepfool|cw");
  attack_cmd->add_option("--epsilon", o.epsilon, "l_inf budget");

  auto* verify_cmd = app.add_subcommand("verify", "check closed forms against numerical oracles");
  verify_cmd->add_option("--out", o.out, "output directory (default $RRL_OUT_DIR/verify)");
  verify_cmd->add_option("--seed", o.seed, "fixture seed");
  verify_cmd->add_option("--suite", o.suites, "run only these suites (repeatable)");
  std::string fault_help = "deliberately break one formula:";
  for (Fault f : all_faults()) fault_help += " " + to_string(f);
  verify_cmd->add_option("--inject-fault", o.fault, fault_help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(o, false);
    if (ft_cmd->parsed()) return cmd_train(o, true);
    if (sweep_cmd->parsed()) return cmd_sweep(o);
    if (cert_cmd->parsed()) return cmd_certify(o);
    if (attack_cmd->parsed()) return cmd_attack(o);
    if (verify_cmd->parsed()) return cmd_verify(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kConfig;
}
