#pragma once

// Plain CSV tables with '#' comment headers. Files are written to a sibling
// temporary and renamed into place so readers never see a partial table.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "becmet/errors.hpp"

namespace becmet {

class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void comment(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) comments_.push_back(line);
  }

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw DomainError("CsvTable: row width does not match the header");
    rows_.push_back(std::move(row));
  }

  std::size_t rows() const { return rows_.size(); }

  void write(std::ostream& out) const {
    for (const auto& c : comments_) out << "# " << c << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
    out << '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        std::visit([&](const auto& v) { put(out, v); }, row[i]);
      }
      out << '\n';
    }
  }

  std::string str() const {
    std::ostringstream s;
    write(s);
    return s.str();
  }

 private:
  static void put(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  }
  static void put(std::ostream& out, long long v) { out << v; }
  static void put(std::ostream& out, const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) {
      out << v;
      return;
    }
    out << '"';
    for (char c : v) out << (c == '"' ? "\"\"" : std::string(1, c));
    out << '"';
  }

  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::vector<Cell>> rows_;
};

/// Write text to `path` via a temporary file in the same directory and a rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ConfigError("cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

}  // namespace becmet
