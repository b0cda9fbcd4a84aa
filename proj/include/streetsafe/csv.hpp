#pragma once

// Minimal RFC-4180-ish CSV reading and writing: comma separated, optional
// double-quoted fields, first line is the header.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "streetsafe/errors.hpp"

namespace streetsafe::csv {

inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

class Table {
 public:
  Table() = default;

  /// Parses CSV text. `source` names the origin in error messages.
  static Table parse(std::string_view text, std::string source) {
    Table t;
    t.source_ = std::move(source);
    std::size_t pos = 0;
    bool first = true;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      pos = end + 1;
      ++line_no;
      if (line.empty()) {
        if (end == text.size()) break;
        continue;
      }
      auto fields = split_line(line);
      if (first) {
        t.header_ = std::move(fields);
        first = false;
      } else {
        if (fields.size() != t.header_.size()) {
          throw SchemaError(t.source_, "line " + std::to_string(line_no),
                            "expected " + std::to_string(t.header_.size()) + " fields, got " +
                                std::to_string(fields.size()));
        }
        t.rows_.push_back(std::move(fields));
      }
      if (end == text.size()) break;
    }
    if (first) throw SchemaError(t.source_, "header", "missing header line");
    return t;
  }

  static Table read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path, "file", "cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const std::string& source() const noexcept { return source_; }

  /// Index of a named column; throws SchemaError naming the column if absent.
  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
      if (header_[i] == name) return i;
    throw SchemaError(source_, std::string(name), "missing column");
  }

  bool has_column(std::string_view name) const {
    for (const auto& h : header_)
      if (h == name) return true;
    return false;
  }

  void require(std::initializer_list<std::string_view> names) const {
    for (auto n : names) (void)column(n);
  }

  double number(std::size_t row, std::size_t col) const {
    const std::string& s = rows_.at(row).at(col);
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && *b == ' ') ++b;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || b == e) {
      throw SchemaError(source_, header_.at(col),
                        "row " + std::to_string(row + 1) + ": not a number: '" + s + "'");
    }
    return v;
  }

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

/// Shortest round-trip representation; output is byte-stable.
inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

class Writer {
 public:
  explicit Writer(std::vector<std::string> header) { row(header); }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(fields[i]);
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << out_.str();
  }

 private:
  std::ostringstream out_;
};

}  // namespace streetsafe::csv
