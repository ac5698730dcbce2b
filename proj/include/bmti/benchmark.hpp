// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bmti/pipeline.hpp"

namespace bmti {

inline constexpr int kReportSchema = 1;

struct DatasetSpec {
  std::string name;
  std::optional<double> beta;
};

struct BenchmarkConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> sizes;
  EstimatorParams params;
};

struct EvaluationReport {
  std::string method;
  std::string dataset;
  double beta = 0.0;
  std::size_t n = 0;
  std::size_t D = 0;
  double d_used = 0.0;
  double mae = 0.0;
  double aligned_offset = 0.0;
  /// NaN unless per-point uncertainties were computed.
  double pull_mean = 0.0;
  double pull_std = 0.0;
  double runtime_seconds = 0.0;
  std::uint64_t seed = 0;
  std::optional<std::string> error;
  std::vector<std::string> warnings;
};

/// Reads estimator settings (k_min, k_max, lr_threshold, alpha, precision_mode,
/// cg_tol, cg_max_iter, uncertainties, id, discard_fraction, eps2_min, k,
/// bandwidth, volume_dim). Unknown keys raise ParameterError.
EstimatorParams params_from_json(const nlohmann::json& j, EstimatorParams base = {});

BenchmarkConfig parse_benchmark_config(const nlohmann::json& j);
BenchmarkConfig load_benchmark_config(const std::string& path);

/// Scores a finished estimate against the cloud's truth.
EvaluationReport evaluate_estimate(const MethodResult& result, const PointCloud& cloud);

/// One report per (dataset, size, seed, method) cell. Failures are recorded
/// in the report's error field and the run continues.
std::vector<EvaluationReport> run_benchmark(const BenchmarkConfig& config);

nlohmann::json reports_to_json(const std::vector<EvaluationReport>& reports);
void write_reports_json(const std::string& path, const std::vector<EvaluationReport>& reports);
void write_reports_csv(const std::string& path, const std::vector<EvaluationReport>& reports);

}  // namespace bmti
