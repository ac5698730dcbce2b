// SPDX-License-Identifier: Apache-2.0

#include "bmti/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "bmti/csv_io.hpp"
#include "bmti/error.hpp"

namespace bmti {

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

AlignedError align_and_mae(std::span<const double> predicted, std::span<const double> truth,
                           Alignment alignment) {
  if (predicted.size() != truth.size()) throw ParameterError("align_and_mae: length mismatch");
  if (predicted.empty()) throw ParameterError("align_and_mae: empty input");
  const std::size_t n = predicted.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(predicted[i]) || !std::isfinite(truth[i]))
      throw ParameterError("align_and_mae: non-finite value");
    diff[i] = truth[i] - predicted[i];
  }
  AlignedError out;
  if (alignment == Alignment::mean) {
    double s = 0.0;
    for (double d : diff) s += d;
    out.offset = s / static_cast<double>(n);
  } else {
    out.offset = median_of(diff);
  }
  double s = 0.0;
  for (double d : diff) s += std::abs(d - out.offset);
  out.mae = s / static_cast<double>(n);
  return out;
}

void parity_export(std::span<const double> predicted, std::span<const double> truth,
                   const std::string& path) {
  if (predicted.size() != truth.size()) throw ParameterError("parity_export: length mismatch");
  const double offset = predicted.empty() ? 0.0 : align_and_mae(predicted, truth).offset;
  CsvTable table;
  table.header = {"F_true", "F_hat_aligned"};
  table.columns.resize(2);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    table.columns[0].push_back(truth[i]);
    table.columns[1].push_back(predicted[i] + offset);
  }
  write_csv(path, table);
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_distance_normal(std::span<const double> z) {
  if (z.empty()) throw ParameterError("ks_distance_normal: empty sample");
  std::vector<double> s(z.begin(), z.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = standard_normal_cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  if (n == 0 || !(alpha > 0.0 && alpha < 1.0)) throw ParameterError("ks_critical_value: bad arguments");
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(n));
}

PullStatistics pull_statistics(std::span<const double> values, std::span<const double> errors,
                               std::span<const double> truth) {
  if (values.size() != errors.size() || values.size() != truth.size())
    throw ParameterError("pull_statistics: length mismatch");
  if (values.empty()) throw ParameterError("pull_statistics: empty input");
  std::vector<double> z(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(errors[i] > 0.0)) throw ParameterError("pull_statistics: errors must be strictly positive");
    z[i] = (values[i] - truth[i]) / errors[i];
  }
  PullStatistics out;
  out.n = z.size();
  double s = 0.0;
  for (double v : z) s += v;
  out.mean = s / static_cast<double>(z.size());
  double ss = 0.0;
  for (double v : z) ss += (v - out.mean) * (v - out.mean);
  out.std = z.size() > 1 ? std::sqrt(ss / static_cast<double>(z.size() - 1)) : 0.0;
  out.ks_distance = ks_distance_normal(z);
  return out;
}

}  // namespace bmti
