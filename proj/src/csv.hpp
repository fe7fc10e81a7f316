#pragma once

#include <string>
#include <vector>

namespace insole {

// Numeric CSV table: one header row of column names, '.' decimal, UTF-8.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns; // columns[c][row]

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  // Index of a header name; throws SchemaError when absent.
  std::size_t column(const std::string &name) const;
};

CsvTable read_csv(const std::string &path);
// Requires exactly the given header names (order included).
CsvTable read_csv_expect(const std::string &path,
                         const std::vector<std::string> &expected_header);

// Deterministic numeric formatting used by every emitted file: %.12g gives
// byte-stable output while keeping signals accurate to ~1e-12 relative.
std::string format_double(double x);

class CsvWriter {
public:
  explicit CsvWriter(const std::string &path);
  ~CsvWriter();
  CsvWriter(const CsvWriter &) = delete;
  CsvWriter &operator=(const CsvWriter &) = delete;

  void write_header(const std::vector<std::string> &names);
  void write_row(const std::vector<double> &values);
  // Mixed row of already-formatted cells.
  void write_cells(const std::vector<std::string> &cells);

private:
  struct Impl;
  Impl *impl_;
};

} // namespace insole
