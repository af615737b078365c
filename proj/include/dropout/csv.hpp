#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dropout {

/// Data-file problem with a location attached: "file:line: column 'x': msg".
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the file
  std::vector<std::string> fields;
};

class CsvTable;

/// Typed access to one row; parse failures name file, line and column.
class CsvRowView {
 public:
  CsvRowView(const CsvTable& table, const CsvRow& row) : table_(&table), row_(&row) {}

  [[nodiscard]] std::size_t line() const { return row_->line; }
  [[nodiscard]] const std::string& text(std::string_view column) const;
  [[nodiscard]] int integer(std::string_view column) const;
  [[nodiscard]] std::optional<int> optional_integer(std::string_view column) const;
  [[nodiscard]] double real(std::string_view column) const;
  [[nodiscard]] std::optional<double> optional_real(std::string_view column) const;
  [[nodiscard]] bool flag(std::string_view column) const;

  [[noreturn]] void fail(std::string_view column, const std::string& message) const;

 private:
  const CsvTable* table_;
  const CsvRow* row_;
};

class CsvTable {
 public:
  /// Reads a headed CSV file and checks that every required column exists.
  static CsvTable read(const std::filesystem::path& path,
                       std::span<const std::string_view> required_columns);

  [[nodiscard]] const std::string& path() const { return path_; }
  [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
  [[nodiscard]] std::size_t size() const { return rows_.size(); }
  [[nodiscard]] CsvRowView row(std::size_t i) const { return {*this, rows_[i]}; }
  [[nodiscard]] std::size_t column(std::string_view name) const;

 private:
  std::string path_;
  std::vector<std::string> header_;
  std::vector<CsvRow> rows_;
};

/// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(&out) {}
  void row(std::span<const std::string> fields);
  void row(std::initializer_list<std::string> fields) {
    row(std::span<const std::string>(fields.begin(), fields.size()));
  }

 private:
  std::ostream* out_;
};

}  // namespace dropout
