#include "csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace insole {

namespace {

std::vector<std::string> split_line(const std::string &line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ','))
    cells.push_back(cell);
  if (!line.empty() && line.back() == ',')
    cells.emplace_back();
  return cells;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r')
    s.pop_back();
  return s;
}

} // namespace

std::size_t CsvTable::column(const std::string &name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name)
      return i;
  raise(Fault::SchemaError, "missing CSV column: " + name);
}

CsvTable read_csv(const std::string &path) {
  std::ifstream in(path);
  require(in.good(), Fault::IoError, "cannot open CSV file: " + path);

  CsvTable table;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Fault::EmptyFile,
          "empty CSV file: " + path);
  for (auto &name : split_line(strip_cr(line)))
    table.header.push_back(name);
  require(!table.header.empty(), Fault::SchemaError, "CSV header empty: " + path);
  table.columns.resize(table.header.size());

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty())
      continue;
    const auto cells = split_line(line);
    require(cells.size() == table.header.size(), Fault::SchemaError,
            path + ":" + std::to_string(lineno) + ": expected " +
                std::to_string(table.header.size()) + " columns, got " +
                std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      char *end = nullptr;
      const double x = std::strtod(cells[c].c_str(), &end);
      require(end && *end == '\0' && end != cells[c].c_str(), Fault::SchemaError,
              path + ":" + std::to_string(lineno) + ": not a number: " + cells[c]);
      table.columns[c].push_back(x);
    }
  }
  require(table.rows() > 0, Fault::EmptyFile, "CSV has no data rows: " + path);
  return table;
}

CsvTable read_csv_expect(const std::string &path,
                         const std::vector<std::string> &expected_header) {
  CsvTable table = read_csv(path);
  require(table.header == expected_header, Fault::SchemaError,
          "unexpected CSV header in " + path);
  return table;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

struct CsvWriter::Impl {
  std::ofstream out;
};

CsvWriter::CsvWriter(const std::string &path) : impl_(new Impl) {
  impl_->out.open(path);
  if (!impl_->out.good()) {
    delete impl_;
    raise(Fault::IoError, "cannot write CSV file: " + path);
  }
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::write_header(const std::vector<std::string> &names) {
  write_cells(names);
}

void CsvWriter::write_row(const std::vector<double> &values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values)
    cells.push_back(format_double(v));
  write_cells(cells);
}

void CsvWriter::write_cells(const std::vector<std::string> &cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i)
      impl_->out << ',';
    impl_->out << cells[i];
  }
  impl_->out << '\n';
}

} // namespace insole
