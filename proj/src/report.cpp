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

#include "rrl/report.hpp"

#include "rrl/svg.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace rrl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_escape(fields[i]);
  }
  os << '\n';
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }

bool bounded(AttackKind k) { return k == AttackKind::fgsm || k == AttackKind::pgd; }

std::vector<std::string> metrics_fields(const std::string& model_id, std::uint64_t seed,
                                        RegularizerKind kind, double lambda,
                                        const AttackMetrics& m) {
  return {model_id,
          std::to_string(seed),
          to_string(kind),
          fmt(lambda),
          to_string(m.config.kind),
          fmt(bounded(m.config.kind) ? m.config.epsilon : kNaN),
          fmt(m.clean_acc),
          fmt(m.robust_acc),
          fmt(m.mean_min_l2),
          fmt(m.median_min_l2),
          fmt(m.n_samples),
          fmt(m.n_success),
          m.config.describe()};
}

std::vector<std::string> certificate_fields(std::size_t id, const RobustnessCertificate& c) {
  const double xi = c.certified() ? c.slack : kNaN;
  return {fmt(id),
          fmt(c.num_classes),
          c.certified() ? "certified" : "uncertifiable",
          fmt(c.p_y),
          fmt(c.loss),
          fmt(xi),
          fmt(c.nu),
          fmt(c.mu),
          fmt(c.w_l1),
          fmt(c.epsilon),
          fmt(c.r2_analytic),
          fmt(c.rinf_analytic),
          fmt(c.eta_star),
          fmt(c.taylor_lower),
          fmt(c.taylor_upper),
          fmt(c.xlip_bound),
          fmt(c.lip_bound)};
}

void write_certificate_rows(std::ostream& os, const std::vector<RobustnessCertificate>& certs,
                            const std::string& model_id) {
  auto emit = [&](std::vector<std::string> f) {
    if (!model_id.empty()) f.insert(f.begin(), model_id);
    write_row(os, f);
  };
  for (std::size_t i = 0; i < certs.size(); ++i) emit(certificate_fields(i, certs[i]));
  if (certs.empty()) return;

  // Summary rows: percentile of each numeric column over certified samples.
  using Getter = double (*)(const RobustnessCertificate&);
  const Getter getters[] = {
      [](const RobustnessCertificate& c) { return c.p_y; },
      [](const RobustnessCertificate& c) { return c.loss; },
      [](const RobustnessCertificate& c) { return c.slack; },
      [](const RobustnessCertificate& c) { return c.nu; },
      [](const RobustnessCertificate& c) { return c.mu; },
      [](const RobustnessCertificate& c) { return c.w_l1; },
      [](const RobustnessCertificate& c) { return c.epsilon; },
      [](const RobustnessCertificate& c) { return c.r2_analytic; },
      [](const RobustnessCertificate& c) { return c.rinf_analytic; },
      [](const RobustnessCertificate& c) { return c.eta_star; },
      [](const RobustnessCertificate& c) { return c.taylor_lower; },
      [](const RobustnessCertificate& c) { return c.taylor_upper; },
      [](const RobustnessCertificate& c) { return c.xlip_bound; },
      [](const RobustnessCertificate& c) { return c.lip_bound; },
  };
  std::size_t n_cert = 0;
  for (const auto& c : certs) n_cert += c.certified();
  for (const auto& [label, q] : {std::pair{"p50", 0.5}, std::pair{"p90", 0.9}}) {
    std::vector<std::string> f{label, fmt(certs.front().num_classes),
                               "summary(n=" + std::to_string(n_cert) + ")"};
    for (Getter g : getters) {
      std::vector<double> v;
      for (const auto& c : certs)
        if (c.certified() && !std::isnan(g(c))) v.push_back(g(c));
      f.push_back(fmt(percentile(v, q)));
    }
    emit(f);
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

void write_schema_line(std::ostream& os, const std::string& name, int version) {
  os << "#schema=rrl." << name << '/' << version << '\n';
}

std::vector<std::string> metrics_columns() {
  return {"model_id",   "seed",        "reg_kind",      "lambda",    "attack",
          "epsilon",    "clean_acc",   "robust_acc",    "mean_min_l2",
          "median_min_l2", "n_samples", "n_success",    "attack_params"};
}

std::vector<std::string> certificate_columns() {
  return {"sample_id",   "K",             "status",   "p_y",       "loss",
          "xi",          "nu",            "mu",       "w_l1",      "epsilon",
          "r2_analytic", "rinf_analytic", "eta_star", "taylor_lo", "taylor_hi",
          "mc_lower_xlip", "mc_lower_lip"};
}

void write_metrics_csv(std::ostream& os, const std::vector<RunRecord>& runs) {
  write_schema_line(os, "metrics", 1);
  write_row(os, metrics_columns());
  for (const RunRecord& r : runs) {
    if (r.diverged) continue;
    for (const AttackMetrics& m : r.attacks)
      write_row(os, metrics_fields(r.model_id, r.seed, r.kind, r.lambda, m));
  }
}

void write_attack_metrics_csv(std::ostream& os, const std::string& model_id, std::uint64_t seed,
                              RegularizerKind kind, double lambda,
                              const std::vector<AttackMetrics>& metrics) {
  write_schema_line(os, "metrics", 1);
  write_row(os, metrics_columns());
  for (const AttackMetrics& m : metrics)
    write_row(os, metrics_fields(model_id, seed, kind, lambda, m));
}

void write_metrics_mean_csv(std::ostream& os, const std::vector<MeanRecord>& means) {
  write_schema_line(os, "metrics_mean", 1);
  write_row(os, {"reg_kind", "lambda", "attack", "epsilon", "clean_acc", "robust_acc",
                 "mean_min_l2", "median_min_l2", "n_samples", "n_seeds", "n_divergent",
                 "cert_median_radius", "attack_params"});
  for (const MeanRecord& m : means)
    write_row(os, {to_string(m.kind), fmt(m.lambda), to_string(m.attack.kind),
                   fmt(bounded(m.attack.kind) ? m.attack.epsilon : kNaN), fmt(m.clean_acc),
                   fmt(m.robust_acc), fmt(m.mean_min_l2), fmt(m.median_min_l2),
                   fmt(m.n_samples), fmt(m.n_seeds), fmt(m.n_divergent),
                   fmt(m.cert_median_radius), m.attack.describe()});
}

void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& runs) {
  write_schema_line(os, "runs", 1);
  write_row(os, {"model_id", "seed", "reg_kind", "lambda", "shared", "status",
                 "divergence_epoch", "train_acc", "test_acc", "final_objective",
                 "cert_n", "cert_median_radius", "cert_median_taylor_lo", "cert_median_nu",
                 "cert_median_mu", "seconds", "weights_fnv1a64", "message"});
  for (const RunRecord& r : runs)
    write_row(os, {r.model_id, std::to_string(r.seed), to_string(r.kind), fmt(r.lambda),
                   r.shared ? "1" : "0", r.diverged ? "diverged" : "ok",
                   std::to_string(r.divergence_epoch), fmt(r.train_acc), fmt(r.test_acc),
                   fmt(r.final_objective), fmt(r.certificates.n_certified),
                   fmt(r.certificates.median_radius), fmt(r.certificates.median_taylor_lower),
                   fmt(r.certificates.median_nu), fmt(r.certificates.median_mu),
                   fmt(r.seconds), r.weights_checksum, r.divergence});
}

void write_baselines_csv(std::ostream& os, const std::vector<BaselineRecord>& baselines) {
  write_schema_line(os, "baselines", 1);
  write_row(os, {"seed", "train_acc", "test_acc", "final_ce", "seconds"});
  for (const BaselineRecord& b : baselines)
    write_row(os, {std::to_string(b.seed), fmt(b.train_acc), fmt(b.test_acc),
                   fmt(b.trace.empty() ? kNaN : b.trace.back().ce), fmt(b.seconds)});
}

void write_trace_csv(std::ostream& os, const std::vector<EpochRecord>& trace) {
  write_schema_line(os, "trace", 1);
  write_row(os, {"epoch", "learning_rate", "ce", "reg", "objective", "train_acc"});
  for (const EpochRecord& e : trace)
    write_row(os, {std::to_string(e.epoch), fmt(e.learning_rate), fmt(e.ce), fmt(e.reg),
                   fmt(e.objective), fmt(e.train_acc)});
}

void write_certificates_csv(std::ostream& os, const std::vector<RobustnessCertificate>& certs,
                            const std::string& model_id) {
  write_schema_line(os, "certificates", 1);
  auto cols = certificate_columns();
  if (!model_id.empty()) cols.insert(cols.begin(), "model_id");
  write_row(os, cols);
  write_certificate_rows(os, certs, model_id);
}

void write_sweep_certificates_csv(std::ostream& os, const std::vector<RunRecord>& runs) {
  write_schema_line(os, "certificates", 1);
  auto cols = certificate_columns();
  cols.insert(cols.begin(), "model_id");
  write_row(os, cols);
  for (const RunRecord& r : runs) {
    // Shared lambda = 0 runs are listed once.
    if (r.diverged || (r.shared && r.kind != runs.front().kind)) continue;
    write_certificate_rows(os, r.certificate_rows, r.model_id);
  }
}

void write_oracle_csv(std::ostream& os, const std::vector<OracleReport>& rows,
                      const std::vector<std::string>& suites) {
  write_schema_line(os, "oracle", 1);
  write_row(os, {"suite", "quantity", "analytic", "oracle", "rel_error", "tolerance", "pass",
                 "boundary_margin", "step"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const OracleReport& r = rows[i];
    write_row(os, {i < suites.size() ? suites[i] : "", r.quantity, fmt(r.analytic),
                   fmt(r.oracle), fmt(r.rel_error), fmt(r.tolerance), r.pass ? "1" : "0",
                   fmt(r.boundary_margin), fmt(r.step)});
  }
}

void write_attack_rows_csv(std::ostream& os, const AttackMetrics& metrics) {
  write_schema_line(os, "attack_rows", 1);
  write_row(os, {"sample_id", "label", "clean_correct", "attack", "success", "exhausted",
                 "iterations", "l2", "linf", "loss"});
  for (const AttackSampleRow& r : metrics.rows)
    write_row(os, {fmt(r.sample_id), fmt(r.label), r.clean_correct ? "1" : "0",
                   to_string(metrics.config.kind), r.result.success ? "1" : "0",
                   r.result.exhausted ? "1" : "0", std::to_string(r.result.iterations),
                   fmt(r.result.l2), fmt(r.result.linf), fmt(r.result.loss)});
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["schema"] = "rrl.manifest/1";
  j["command"] = command;
  j["version"] = version;
  j["started_at"] = started_at;
  j["config"] = config;
  j["seeds"] = seeds;
  j["data_checksums"] = data_checksums;
  j["timings_seconds"] = timings;
  return j;
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
  std::ofstream out = open_output(dir / "manifest.json");
  out << manifest.to_json().dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + (dir / "manifest.json").string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepConfig& cfg,
                         const SweepResult& result) {
  auto emit = [&](const char* name, auto&& writer) {
    std::ofstream out = open_output(dir / name);
    writer(out);
    if (!out) throw std::runtime_error("write failed: " + (dir / name).string());
  };
  emit("metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, result.runs); });
  emit("metrics_mean.csv", [&](std::ostream& os) { write_metrics_mean_csv(os, result.means); });
  emit("runs.csv", [&](std::ostream& os) { write_runs_csv(os, result.runs); });
  emit("baselines.csv", [&](std::ostream& os) { write_baselines_csv(os, result.baselines); });
  emit("certificates.csv",
       [&](std::ostream& os) { write_sweep_certificates_csv(os, result.runs); });
  for (const auto& [stem, chart] : sweep_charts(cfg, result.means)) {
    const std::string name = "plots/" + stem + ".svg";
    emit(name.c_str(), [&](std::ostream& os) { os << render_line_chart(chart); });
  }
}

}  // namespace rrl
