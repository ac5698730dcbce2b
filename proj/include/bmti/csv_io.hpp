// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bmti/point_cloud.hpp"

namespace bmti {

/// Numeric CSV with a header row, stored column-major.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::optional<std::size_t> find(const std::string& name) const;
  /// Throws IoError when the column is missing.
  std::span<const double> column(const std::string& name) const;
};

/// Values are written in shortest round-trip form.
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

/// Columns x0..x{D-1} and optionally F_true.
PointCloud read_point_cloud(const std::string& path);
void write_point_cloud(const std::string& path, const PointCloud& cloud);

std::string format_double(double v);

}  // namespace bmti
