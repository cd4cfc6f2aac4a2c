#pragma once

// Flat key-value records and CSV tables; numbers go through one formatter so
// outputs are byte-stable.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace thinobs {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class Record {
 public:
  Record& add(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
    return *this;
  }
  Record& add(const std::string& key, const char* value) { return add(key, std::string(value)); }
  Record& add(const std::string& key, double value) { return add(key, format_number(value)); }
  Record& add(const std::string& key, int value) { return add(key, std::to_string(value)); }
  Record& add(const std::string& key, std::size_t value) { return add(key, std::to_string(value)); }
  Record& add(const std::string& key, bool value) { return add(key, std::string(value ? "true" : "false")); }

  /// Appends another record's entries under `prefix.`.
  Record& merge(const std::string& prefix, const Record& other) {
    for (const auto& [k, v] : other.entries_) entries_.emplace_back(prefix.empty() ? k : prefix + "." + k, v);
    return *this;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : entries_)
      if (k == key) return &v;
    return nullptr;
  }

  /// One "key=value" per line.
  std::string str() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  void add_row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(format_number(v));
    rows_.push_back(std::move(s));
  }

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::ostringstream os;
    write_line(os, columns_);
    for (const auto& r : rows_) write_line(os, r);
    return os.str();
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << "\n";
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace thinobs
