#pragma once

// Columnar CSV with a one-line JSON header; JSON reports. Doubles are written
// in shortest round-trip form.

#include <Eigen/Dense>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "democ/democratic.hpp"

namespace democ::harness {

using Json = nlohmann::json;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("parse_double: bad number '" + std::string(s) + "'");
  return v;
}

/// JSON has no infinities; they go out as the strings "inf" / "-inf".
inline Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline double json_to_double(const Json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

inline Json json_vector(VectorCRef v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(json_number(v[i]));
  return a;
}

inline Vector vector_from_json(const Json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = json_to_double(a[i]);
  return v;
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  static constexpr char digits[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  return std::string(buf, 16);
}

inline std::string config_hash(const Json& config) { return fnv1a_hex(config.dump()); }

struct Table {
  Json header = Json::object();
  std::vector<std::string> names;
  /// One vector per column, all the same length.
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return columns[i];
    throw std::out_of_range("Table: no column '" + name + "'");
  }
};

inline void write_table(std::ostream& os, const Table& t) {
  if (t.names.size() != t.columns.size()) throw std::invalid_argument("write_table: names/columns mismatch");
  const std::size_t rows = t.rows();
  for (const auto& c : t.columns)
    if (c.size() != rows) throw std::invalid_argument("write_table: ragged columns");
  os << t.header.dump() << '\n';
  for (std::size_t i = 0; i < t.names.size(); ++i) os << (i ? "," : "") << t.names[i];
  os << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << format_double(t.columns[i][r]);
    os << '\n';
  }
}

inline Table read_table(std::istream& is) {
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_table: missing JSON header");
  t.header = Json::parse(line);
  if (!std::getline(is, line)) throw std::runtime_error("read_table: missing column names");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) t.names.push_back(name);
  }
  t.columns.assign(t.names.size(), {});
  std::size_t lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const auto end = comma == std::string::npos ? line.size() : comma;
      if (col >= t.names.size())
        throw std::runtime_error("read_table: too many fields on line " + std::to_string(lineno));
      t.columns[col++].push_back(parse_double(std::string_view(line).substr(start, end - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (col != t.names.size())
      throw std::runtime_error("read_table: too few fields on line " + std::to_string(lineno));
  }
  return t;
}

inline void write_table_file(const std::string& path, const Table& t) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_table(os, t);
}

inline Table read_table_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_table(is);
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << j.dump(2) << '\n';
}

inline Json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return Json::parse(is);
}

// Problem files: columns y, h0..h{N-1} (one row per measurement); x_true, if
// known, rides in the header.
struct ProblemData {
  Vector y;
  Matrix h;
  std::optional<Vector> x_true;
  Json header = Json::object();
};

inline Table problem_table(const ProblemData& p) {
  Table t;
  t.header = p.header;
  t.header["kind"] = "problem";
  t.header["M"] = p.h.rows();
  t.header["N"] = p.h.cols();
  if (p.x_true) t.header["x_true"] = json_vector(*p.x_true);
  t.names.push_back("y");
  t.columns.emplace_back(p.y.data(), p.y.data() + p.y.size());
  for (Eigen::Index j = 0; j < p.h.cols(); ++j) {
    t.names.push_back("h" + std::to_string(j));
    std::vector<double> col(static_cast<std::size_t>(p.h.rows()));
    for (Eigen::Index i = 0; i < p.h.rows(); ++i) col[static_cast<std::size_t>(i)] = p.h(i, j);
    t.columns.push_back(std::move(col));
  }
  return t;
}

inline ProblemData problem_from_table(const Table& t) {
  const auto& y = t.column("y");
  ProblemData p;
  p.header = t.header;
  p.y = Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
  std::size_t n = 0;
  while (true) {
    const std::string name = "h" + std::to_string(n);
    bool found = false;
    for (const auto& s : t.names) found = found || s == name;
    if (!found) break;
    ++n;
  }
  if (n == 0) throw std::runtime_error("problem file: no h columns");
  p.h.resize(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const auto& col = t.column("h" + std::to_string(j));
    for (std::size_t i = 0; i < y.size(); ++i)
      p.h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  if (t.header.contains("x_true")) p.x_true = vector_from_json(t.header["x_true"]);
  return p;
}

/// Sample matrix as a table: optional scalar columns first, then x0..x{N-1}.
inline Table samples_table(const std::vector<Vector>& xs, Json header,
                           const std::vector<std::pair<std::string, std::vector<double>>>& extra = {}) {
  Table t;
  t.header = std::move(header);
  std::vector<double> idx(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) idx[i] = static_cast<double>(i);
  t.names.push_back("t");
  t.columns.push_back(std::move(idx));
  for (const auto& [name, col] : extra) {
    t.names.push_back(name);
    t.columns.push_back(col);
  }
  const Eigen::Index n = xs.empty() ? 0 : xs.front().size();
  for (Eigen::Index j = 0; j < n; ++j) {
    t.names.push_back("x" + std::to_string(j));
    std::vector<double> col(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) col[i] = xs[i][j];
    t.columns.push_back(std::move(col));
  }
  return t;
}

inline std::vector<Vector> samples_from_table(const Table& t) {
  std::vector<std::size_t> cols;
  for (std::size_t j = 0;; ++j) {
    const std::string name = "x" + std::to_string(j);
    std::size_t found = t.names.size();
    for (std::size_t i = 0; i < t.names.size(); ++i)
      if (t.names[i] == name) found = i;
    if (found == t.names.size()) break;
    cols.push_back(found);
  }
  if (cols.empty()) throw std::runtime_error("chain file: no x columns");
  std::vector<Vector> out(t.rows(), Vector(static_cast<Eigen::Index>(cols.size())));
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out[r][static_cast<Eigen::Index>(j)] = t.columns[cols[j]][r];
  return out;
}

}  // namespace democ::harness
