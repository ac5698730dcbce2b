// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bmti {

enum class Alignment { mean, median };

struct AlignedError {
  double offset = 0.0;
  double mae = 0.0;
};

/// offset = mean (or median) of truth - predicted; mae = mean |truth - predicted - offset|.
AlignedError align_and_mae(std::span<const double> predicted, std::span<const double> truth,
                           Alignment alignment = Alignment::mean);

/// Writes `F_true,F_hat_aligned` rows, predictions shifted by the mean offset.
void parity_export(std::span<const double> predicted, std::span<const double> truth,
                   const std::string& path);

struct PullStatistics {
  std::size_t n = 0;
  double mean = 0.0;
  /// Sample standard deviation (n - 1 denominator).
  double std = 0.0;
  double ks_distance = 0.0;
};

/// z = (values - truth) / errors. Errors must be strictly positive.
PullStatistics pull_statistics(std::span<const double> values, std::span<const double> errors,
                               std::span<const double> truth);

/// Kolmogorov-Smirnov distance between the sample and N(0, 1).
double ks_distance_normal(std::span<const double> z);

/// Asymptotic KS critical value sqrt(-log(alpha / 2) / 2) / sqrt(n).
double ks_critical_value(std::size_t n, double alpha);

double standard_normal_cdf(double x);

}  // namespace bmti
