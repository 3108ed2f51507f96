// result_table.hpp - numeric table with '#' metadata lines, written as CSV

#pragma once

#include "transduce/errors.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace transduce {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct Column {
  std::string name;
  std::string unit;  // "1" for dimensionless
};

class ResultTable {
 public:
  explicit ResultTable(std::vector<Column> columns) : columns_(std::move(columns)) {}

  void add_meta(std::string key, std::string value) { meta_.emplace_back(std::move(key), std::move(value)); }

  void add_row(std::vector<double> row) {
    if (row.size() != columns_.size()) throw std::logic_error("row width does not match the table");
    for (std::size_t i = 0; i < row.size(); ++i)
      if (!std::isfinite(row[i])) throw NumericalError("non-finite value in column " + columns_[i].name);
    rows_.push_back(std::move(row));
  }

  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  const std::vector<std::pair<std::string, std::string>>& meta() const { return meta_; }

  std::size_t column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i].name == name) return i;
    throw std::out_of_range("no column " + std::string(name));
  }
  std::vector<double> column(std::string_view name) const {
    const std::size_t c = column_index(name);
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r[c]);
    return out;
  }

  void write(std::ostream& os) const {
    for (const auto& [k, v] : meta_) os << "# " << k << ": " << v << '\n';
    os << "# units:";
    for (const auto& c : columns_) os << ' ' << c.name << '=' << c.unit;
    os << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i].name;
    os << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
      os << '\n';
    }
  }

  std::string to_string() const {
    std::ostringstream os;
    write(os);
    return os.str();
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    write(f);
    if (!f) throw std::runtime_error("failed writing " + path);
  }

 private:
  std::vector<Column> columns_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace transduce
