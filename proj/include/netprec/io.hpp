#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "netprec/errors.hpp"
#include "netprec/matrix.hpp"
#include "netprec/simulation.hpp"
#include "netprec/structure.hpp"

namespace netprec {

// Shortest decimal representation that round-trips the double exactly
// (std::to_chars); never more than 17 significant digits.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& field, const std::string& path, std::size_t line) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw IoError(path + ":" + std::to_string(line) + ": cannot parse number '" + field + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

// Headerless numeric CSV -> matrix. Ragged rows and unparsable fields are
// reported with file and line.
inline DenseMatrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::vector<double> data;
  std::size_t rows = 0, cols = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (cols == 0)
      cols = fields.size();
    else if (fields.size() != cols)
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                    " fields, found " + std::to_string(fields.size()));
    for (const std::string& f : fields) data.push_back(parse_double(f, path, line_no));
    ++rows;
  }
  if (rows == 0) throw IoError(path + ": file contains no data");
  try {
    return DenseMatrix(rows, cols, std::move(data));
  } catch (const NonFiniteEntry&) {
    throw IoError(path + ": non-finite value in matrix");
  }
}

// Writes content to a temporary sibling and renames it into place, so a
// failed run never leaves a truncated output file.
inline void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp + ": cannot open for writing");
    out << content;
    if (!out) throw IoError(tmp + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError(path + ": cannot replace output file: " + ec.message());
  }
}

inline std::string matrix_to_csv(const DenseMatrix& m) {
  std::string out;
  out.reserve(m.rows() * m.cols() * 12);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) out.push_back(',');
      out += format_double(m(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

inline void write_csv_matrix(const std::string& path, const DenseMatrix& m) {
  atomic_write(path, matrix_to_csv(m));
}

namespace detail {

inline std::size_t parse_index(const std::string& field, const std::string& path,
                               std::size_t line) {
  const double v = parse_double(field, path, line);
  const auto idx = static_cast<long long>(v);
  if (idx < 0 || static_cast<double>(idx) != v)
    throw IoError(path + ":" + std::to_string(line) + ": '" + field +
                  "' is not a non-negative integer index");
  return static_cast<std::size_t>(idx);
}

}  // namespace detail

// Structure input. Two formats share the extension-free path:
//  - dense: p rows x p columns of 0/1, exactly matching the expected p;
//  - edge list: one "i,j" pair per line, 0-based, undirected. Symmetric
//    closure is applied here and only here; the dense path demands an
//    exactly symmetric matrix.
// A p x p 0/1 file is always read as dense.
inline GraphStructure read_structure(const std::string& path, std::size_t p) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::vector<std::vector<std::string>> lines;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::size_t> line_numbers;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(split_csv_line(line));
    line_numbers.push_back(line_no);
  }
  if (lines.empty()) throw IoError(path + ": file contains no data");

  bool dense = lines.size() == p;
  for (const auto& fields : lines)
    if (fields.size() != p) dense = false;

  if (dense) {
    std::vector<double> data;
    data.reserve(p * p);
    for (std::size_t r = 0; r < lines.size(); ++r)
      for (const std::string& f : lines[r]) data.push_back(parse_double(f, path, line_numbers[r]));
    return from_adjacency(DenseMatrix(p, p, std::move(data)));
  }

  DenseMatrix adj(p, p);
  for (std::size_t r = 0; r < lines.size(); ++r) {
    if (lines[r].size() != 2)
      throw IoError(path + ":" + std::to_string(line_numbers[r]) +
                    ": expected an 'i,j' edge pair");
    const std::size_t i = detail::parse_index(lines[r][0], path, line_numbers[r]);
    const std::size_t j = detail::parse_index(lines[r][1], path, line_numbers[r]);
    if (i >= p || j >= p)
      throw IoError(path + ":" + std::to_string(line_numbers[r]) + ": edge index out of range " +
                    "for p=" + std::to_string(p));
    adj(i, j) = 1.0;
    adj(j, i) = 1.0;
  }
  return from_adjacency(adj);
}

// StudyResult CSV: one row per (n, ratio, method) with a header line.
inline std::string study_to_csv(const StudyResult& result) {
  std::string out = "n,ratio,method,rel_bias_mean,rel_bias_sd,abs_bias_mean,abs_bias_sd,failures";
  const std::size_t s0 = result.s0;
  for (std::size_t k = 1; k <= s0; ++k) out += ",comp_mean_" + std::to_string(k);
  for (std::size_t k = 1; k <= s0; ++k) out += ",comp_sd_" + std::to_string(k);
  out.push_back('\n');
  for (const StudyRow& row : result.rows) {
    out += std::to_string(row.n);
    out.push_back(',');
    out += format_double(row.ratio);
    out.push_back(',');
    out += method_name(row.method);
    out.push_back(',');
    out += format_double(row.rel_bias_mean);
    out.push_back(',');
    out += format_double(row.rel_bias_sd);
    out.push_back(',');
    out += format_double(row.abs_bias_mean);
    out.push_back(',');
    out += format_double(row.abs_bias_sd);
    out.push_back(',');
    out += std::to_string(row.failures);
    for (std::size_t k = 0; k < s0; ++k) {
      out.push_back(',');
      out += k < row.component_means.size() ? format_double(row.component_means[k]) : "";
    }
    for (std::size_t k = 0; k < s0; ++k) {
      out.push_back(',');
      out += k < row.component_sds.size() ? format_double(row.component_sds[k]) : "";
    }
    out.push_back('\n');
  }
  return out;
}

namespace detail {

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string mean_sd_cell(double mean, double sd) {
  return fixed2(mean) + " (" + fixed2(sd) + ")";
}

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace detail

// Plain-text table with "mean (sd)" cells, one block per method.
inline std::string study_to_table(const StudyResult& result) {
  const std::size_t s0 = result.s0;
  const std::size_t w = 14;
  std::string out;
  std::vector<Method> methods;
  for (const StudyRow& row : result.rows)
    if (std::find(methods.begin(), methods.end(), row.method) == methods.end())
      methods.push_back(row.method);

  for (Method m : methods) {
    out += "method: ";
    out += method_name(m);
    out.push_back('\n');
    out += detail::pad("n", 6) + detail::pad("p/n", 8) + detail::pad("RelBias", w) +
           detail::pad("AbsBias", w);
    for (std::size_t k = 1; k <= s0; ++k) out += detail::pad("w" + std::to_string(k), w);
    out += detail::pad("fail", 6);
    out.push_back('\n');
    for (const StudyRow& row : result.rows) {
      if (row.method != m) continue;
      out += detail::pad(std::to_string(row.n), 6);
      out += detail::pad(detail::fixed2(row.ratio), 8);
      out += detail::pad(detail::mean_sd_cell(row.rel_bias_mean, row.rel_bias_sd), w);
      out += detail::pad(detail::mean_sd_cell(row.abs_bias_mean, row.abs_bias_sd), w);
      for (std::size_t k = 0; k < s0; ++k)
        out += detail::pad(
            detail::mean_sd_cell(row.component_means[k], row.component_sds[k]), w);
      out += detail::pad(std::to_string(row.failures), 6);
      out.push_back('\n');
    }
    out.push_back('\n');
  }
  return out;
}

// Side-by-side comparison table, methods in columns, scenarios in rows.
inline std::string comparison_table(const StudyResult& result) {
  const std::size_t w = 16;
  std::string out = detail::pad("n", 6) + detail::pad("p/n", 8);
  std::vector<Method> methods;
  for (const StudyRow& row : result.rows)
    if (std::find(methods.begin(), methods.end(), row.method) == methods.end())
      methods.push_back(row.method);
  for (Method m : methods) {
    out += detail::pad(std::string(method_name(m)) + " RelBias", w + 4);
    out += detail::pad("AbsBias", w);
  }
  out.push_back('\n');

  std::vector<std::pair<std::size_t, double>> scenarios;
  for (const StudyRow& row : result.rows) {
    const std::pair<std::size_t, double> key{row.n, row.ratio};
    if (std::find(scenarios.begin(), scenarios.end(), key) == scenarios.end())
      scenarios.push_back(key);
  }
  for (const auto& [n, ratio] : scenarios) {
    out += detail::pad(std::to_string(n), 6);
    out += detail::pad(detail::fixed2(ratio), 8);
    for (Method m : methods) {
      for (const StudyRow& row : result.rows) {
        if (row.n != n || row.ratio != ratio || row.method != m) continue;
        out += detail::pad(detail::mean_sd_cell(row.rel_bias_mean, row.rel_bias_sd), w + 4);
        out += detail::pad(detail::mean_sd_cell(row.abs_bias_mean, row.abs_bias_sd), w);
      }
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace netprec
