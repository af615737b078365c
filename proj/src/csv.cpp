#include "dropout/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

namespace dropout {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quoted field");
  fields.push_back(std::move(current));
  return fields;
}

CsvTable CsvTable::read(const std::filesystem::path& path,
                        std::span<const std::string_view> required_columns) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");

  CsvTable table;
  table.path_ = path.string();
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv_line(line);
    } catch (const std::invalid_argument& e) {
      throw DataError(table.path_ + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) {
      table.header_ = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header_.size()) {
      throw DataError(table.path_ + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header_.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    table.rows_.push_back({line_no, std::move(fields)});
  }
  if (!have_header) throw DataError(table.path_ + ": missing header row");
  for (auto name : required_columns) {
    bool found = false;
    for (const auto& h : table.header_) found = found || h == name;
    if (!found) {
      throw DataError(table.path_ + ":1: missing required column '" + std::string(name) + "'");
    }
  }
  return table;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw DataError(path_ + ": no column '" + std::string(name) + "'");
}

const std::string& CsvRowView::text(std::string_view column) const {
  return row_->fields[table_->column(column)];
}

void CsvRowView::fail(std::string_view column, const std::string& message) const {
  throw DataError(table_->path() + ":" + std::to_string(row_->line) + ": column '" +
                  std::string(column) + "': " + message);
}

int CsvRowView::integer(std::string_view column) const {
  const auto& s = text(column);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    fail(column, "expected an integer, found '" + s + "'");
  }
  return value;
}

std::optional<int> CsvRowView::optional_integer(std::string_view column) const {
  if (text(column).empty()) return std::nullopt;
  return integer(column);
}

double CsvRowView::real(std::string_view column) const {
  const auto& s = text(column);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    fail(column, "expected a number, found '" + s + "'");
  }
  return value;
}

std::optional<double> CsvRowView::optional_real(std::string_view column) const {
  if (text(column).empty()) return std::nullopt;
  return real(column);
}

bool CsvRowView::flag(std::string_view column) const {
  const auto& s = text(column);
  if (s == "0") return false;
  if (s == "1") return true;
  fail(column, "expected 0 or 1, found '" + s + "'");
}

std::string format_real(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw std::runtime_error("format_real: conversion failed");
  return {buf.data(), ptr};
}

void CsvWriter::row(std::span<const std::string> fields) {
  bool first = true;
  for (const auto& f : fields) {
    if (!first) *out_ << ',';
    first = false;
    if (f.find_first_of(",\"\n") == std::string::npos) {
      *out_ << f;
      continue;
    }
    *out_ << '"';
    for (char c : f) {
      if (c == '"') *out_ << '"';
      *out_ << c;
    }
    *out_ << '"';
  }
  *out_ << '\n';
}

}  // namespace dropout
