// SPDX-License-Identifier: Apache-2.0

#include "bmti/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bmti/error.hpp"

namespace bmti {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || begin == end)
    throw IoError(path + ":" + std::to_string(line) + ": cannot parse '" + s + "' as a number");
  return v;
}

}  // namespace

std::optional<std::size_t> CsvTable::find(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

std::span<const double> CsvTable::column(const std::string& name) const {
  const auto c = find(name);
  if (!c) throw IoError("CSV has no column '" + name + "'");
  return columns[*c];
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_csv(const std::string& path, const CsvTable& table) {
  if (table.columns.size() != table.header.size()) throw ParameterError("write_csv: header/column mismatch");
  const std::size_t n = table.rows();
  for (const auto& c : table.columns)
    if (c.size() != n) throw ParameterError("write_csv: ragged columns");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
  for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
  out << '\n';
  std::string line;
  for (std::size_t r = 0; r < n; ++r) {
    line.clear();
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) line.push_back(',');
      line += format_double(table.columns[c][r]);
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  table.header = split(line);
  table.columns.resize(table.header.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != table.header.size())
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(table.header.size()) +
                    " fields, got " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) table.columns[c].push_back(parse_double(fields[c], path, lineno));
  }
  return table;
}

PointCloud read_point_cloud(const std::string& path) {
  const CsvTable t = read_csv(path);
  std::size_t dim = 0;
  while (t.find("x" + std::to_string(dim))) ++dim;
  if (dim == 0) throw IoError(path + ": no x0 column");
  const std::size_t n = t.rows();
  std::vector<double> coords(n * dim);
  for (std::size_t a = 0; a < dim; ++a) {
    const auto col = t.column("x" + std::to_string(a));
    for (std::size_t i = 0; i < n; ++i) coords[i * dim + a] = col[i];
  }
  if (auto f = t.find("F_true")) return PointCloud(std::move(coords), dim, t.columns[*f]);
  return PointCloud(std::move(coords), dim);
}

void write_point_cloud(const std::string& path, const PointCloud& cloud) {
  CsvTable t;
  for (std::size_t a = 0; a < cloud.dim(); ++a) t.header.push_back("x" + std::to_string(a));
  t.columns.assign(cloud.dim(), std::vector<double>(cloud.size()));
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (std::size_t a = 0; a < cloud.dim(); ++a) t.columns[a][i] = cloud.point(i)[a];
  if (cloud.has_truth()) {
    t.header.push_back("F_true");
    const auto tr = cloud.truth();
    t.columns.emplace_back(tr.begin(), tr.end());
  }
  write_csv(path, t);
}

}  // namespace bmti
