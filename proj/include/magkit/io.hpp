// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "magkit/error.hpp"
#include "magkit/graphs.hpp"
#include "magkit/metric.hpp"

namespace magkit::io {

/// Shortest round-trip representation is not guaranteed by every libc, so
/// doubles are written with 17 significant digits.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has none
  Matrix values;
  /// Raw values of the label column, when one was requested.
  std::vector<double> labels;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Parses comma-separated numeric rows. A first row that does not parse as
/// numbers is taken as the header. `label_col` names a header column or a
/// 0-based column index; that column is returned separately and excluded
/// from the geometry.
inline CsvTable parse_csv(std::istream& in, const std::string& label_col = "") {
  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::optional<std::size_t> label_index;
  std::optional<std::size_t> width;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;

  auto resolve_label = [&](std::size_t columns) {
    if (label_col.empty() || label_index) return;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (table.header[i] == label_col) label_index = i;
    }
    if (!label_index) {
      const auto idx = detail::parse_number(label_col);
      if (!idx || *idx < 0 || *idx != static_cast<double>(static_cast<std::size_t>(*idx)) ||
          static_cast<std::size_t>(*idx) >= columns) {
        throw InputError("label column '" + label_col + "' not found");
      }
      label_index = static_cast<std::size_t>(*idx);
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty() || line[0] == '#') continue;
    const auto fields = detail::split(line, ',');
    std::vector<double> row;
    bool numeric = true;
    for (auto f : fields) {
      const auto v = detail::parse_number(f);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (first) {
        for (auto f : fields) table.header.emplace_back(f);
        first = false;
        continue;
      }
      throw InputError("line " + std::to_string(line_no) + ": non-numeric field");
    }
    first = false;
    if (width && row.size() != *width) {
      throw InputError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(*width) + " fields");
    }
    width = row.size();
    resolve_label(row.size());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("CSV input has no data rows");
  if (!table.header.empty() && table.header.size() != *width) {
    throw InputError("header width does not match the data");
  }

  const std::size_t geo_cols = *width - (label_index ? 1 : 0);
  if (geo_cols == 0) throw InputError("CSV input has no coordinate columns");
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(geo_cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Eigen::Index c = 0;
    for (std::size_t k = 0; k < rows[r].size(); ++k) {
      if (label_index && k == *label_index) {
        table.labels.push_back(rows[r][k]);
      } else {
        table.values(static_cast<Eigen::Index>(r), c++) = rows[r][k];
      }
    }
  }
  if (label_index && !table.header.empty()) {
    table.header.erase(table.header.begin() + static_cast<std::ptrdiff_t>(*label_index));
  }
  return table;
}

inline CsvTable read_csv(const std::filesystem::path& path,
                         const std::string& label_col = "") {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  return parse_csv(in, label_col);
}

/// Edge list: one "u v" pair per line, 0-based. The node count is one more
/// than the largest endpoint unless given explicitly.
inline Graph parse_edge_list(std::istream& in, std::optional<std::size_t> node_count = {}) {
  std::vector<Graph::Edge> edges;
  std::size_t max_node = 0;
  std::string line;
  std::size_t line_no = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ls{std::string(t)};
    long long u = -1;
    long long v = -1;
    std::string rest;
    if (!(ls >> u >> v) || (ls >> rest) || u < 0 || v < 0) {
      throw InputError("line " + std::to_string(line_no) + ": expected 'u v' node pair");
    }
    edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
    max_node = std::max({max_node, static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
    any = true;
  }
  const std::size_t n = node_count ? *node_count : (any ? max_node + 1 : 0);
  if (n == 0) throw InputError("edge list is empty");
  return Graph(n, edges);
}

inline Graph read_edge_list(const std::filesystem::path& path,
                            std::optional<std::size_t> node_count = {}) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  return parse_edge_list(in, node_count);
}

/// Writes to a temporary sibling and renames it over the target, so readers
/// never observe a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw InputError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot move output into place at '" + path.string() + "'");
  }
}

}  // namespace magkit::io
