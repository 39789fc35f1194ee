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

#ifndef RRL_REPORT_HPP
#define RRL_REPORT_HPP

// CSV and manifest writers. Every CSV starts with a "#schema=rrl.<name>/<v>"
// line followed by the header row; columns only ever get appended.

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrl/attack.hpp"
#include "rrl/certify.hpp"
#include "rrl/oracle.hpp"
#include "rrl/sweep.hpp"
#include "rrl/train.hpp"

namespace rrl {

inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest round-trippable decimal; "nan", "inf", "-inf" for non-finite.
std::string format_double(double v);
std::string csv_escape(const std::string& field);

void write_schema_line(std::ostream& os, const std::string& name, int version);
std::vector<std::string> metrics_columns();
std::vector<std::string> certificate_columns();

void write_metrics_csv(std::ostream& os, const std::vector<RunRecord>& runs);
/// One row per (model, attack): the metrics schema with model_id/seed/kind/lambda.
void write_attack_metrics_csv(std::ostream& os, const std::string& model_id, std::uint64_t seed,
                              RegularizerKind kind, double lambda,
                              const std::vector<AttackMetrics>& metrics);
void write_metrics_mean_csv(std::ostream& os, const std::vector<MeanRecord>& means);
void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& runs);
void write_baselines_csv(std::ostream& os, const std::vector<BaselineRecord>& baselines);
void write_trace_csv(std::ostream& os, const std::vector<EpochRecord>& trace);
/// Per-sample certificate rows, then p50/p90 summary rows over certified samples.
/// `model_id` non-empty adds a leading model_id column.
void write_certificates_csv(std::ostream& os, const std::vector<RobustnessCertificate>& certs,
                            const std::string& model_id = {});
/// Certificates of every non-divergent sweep run, with a leading model_id column.
void write_sweep_certificates_csv(std::ostream& os, const std::vector<RunRecord>& runs);
void write_oracle_csv(std::ostream& os, const std::vector<OracleReport>& rows,
                      const std::vector<std::string>& suites);
/// Per-sample attack rows of one evaluation.
void write_attack_rows_csv(std::ostream& os, const AttackMetrics& metrics);

struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::uint64_t> seeds;
  std::string version = kToolVersion;
  std::map<std::string, std::string> data_checksums;  ///< path -> hex FNV-1a
  std::map<std::string, double> timings;              ///< seconds
  std::string started_at;                             ///< UTC, ISO 8601

  nlohmann::json to_json() const;
};

/// Writes `manifest.json` into `dir` (created if needed).
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);
std::string utc_timestamp();

/// metrics.csv, metrics_mean.csv, runs.csv, baselines.csv, certificates.csv
/// and plots/*.svg of one sweep, written into `dir`.
void write_sweep_outputs(const std::filesystem::path& dir, const SweepConfig& cfg,
                         const SweepResult& result);

/// Opens `path` for writing (creating parent directories); throws std::runtime_error.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace rrl

#endif  // RRL_REPORT_HPP
