#include "report.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "csv.hpp"
#include "error.hpp"

namespace insole {

namespace {

const std::vector<std::string> kFitHeader = {
    "side",          "component",     "model",
    "role",          "dataset",       "breakpoints",
    "selected",      "nrmse_fit_pct", "r_squared_cycle",
    "r_squared_series", "rmse_abs",   "rmse_abs_cycle",
    "rmse_norm_max_pct", "rmse_norm_range_pct", "n_samples",
    "warmup_excluded"};

} // namespace

void write_fit_report_csv(const std::string &path, const std::vector<FitRow> &rows) {
  CsvWriter csv(path);
  csv.write_header(kFitHeader);
  for (const auto &row : rows) {
    csv.write_cells({row.side, row.component, row.model, row.role, row.dataset,
                     std::to_string(row.breakpoints),
                     row.selected ? "1" : "0",
                     format_double(row.report.nrmse_fit_pct),
                     format_double(row.report.r_squared),
                     format_double(row.report.r_squared_series),
                     format_double(row.report.rmse_abs),
                     format_double(row.report.rmse_abs_cycle),
                     format_double(row.report.rmse_norm_max_pct),
                     format_double(row.report.rmse_norm_range_pct),
                     std::to_string(row.report.n_samples),
                     std::to_string(row.report.warmup_excluded)});
  }
}

std::vector<FitRow> read_fit_report_csv(const std::string &path) {
  // The leading columns are strings, so the generic numeric reader does not
  // apply here.
  std::vector<FitRow> rows;
  std::ifstream in(path);
  require(in.good(), Fault::IoError, "cannot open fit report: " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Fault::EmptyFile,
          "empty fit report: " + path);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ','))
      cells.push_back(cell);
    require(cells.size() == kFitHeader.size(), Fault::SchemaError,
            path + ":" + std::to_string(lineno) + ": malformed fit report row");
    FitRow row;
    row.side = cells[0];
    row.component = cells[1];
    row.model = cells[2];
    row.role = cells[3];
    row.dataset = cells[4];
    row.breakpoints = static_cast<std::size_t>(std::stoul(cells[5]));
    row.selected = cells[6] == "1";
    row.report.nrmse_fit_pct = std::stod(cells[7]);
    row.report.r_squared = std::stod(cells[8]);
    row.report.r_squared_series = std::stod(cells[9]);
    row.report.rmse_abs = std::stod(cells[10]);
    row.report.rmse_abs_cycle = std::stod(cells[11]);
    row.report.rmse_norm_max_pct = std::stod(cells[12]);
    row.report.rmse_norm_range_pct = std::stod(cells[13]);
    row.report.n_samples = static_cast<std::size_t>(std::stoul(cells[14]));
    row.report.warmup_excluded = static_cast<std::size_t>(std::stoul(cells[15]));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ReportRow> consolidate(
    const std::vector<std::pair<std::string, std::vector<FitRow>>> &runs) {
  std::vector<ReportRow> out;
  for (const auto &[run, rows] : runs) {
    // Group the selected model's validation rows per (side, component),
    // preserving left-before-right, vertical-before-mediolateral order.
    std::map<std::pair<std::string, std::string>, std::vector<const FitRow *>> groups;
    for (const auto &row : rows)
      if (row.selected && row.role == "validation")
        groups[{row.side, row.component}].push_back(&row);
    for (const auto &[key, group] : groups) {
      ReportRow rr;
      rr.run = run;
      rr.side = key.first;
      rr.component = key.second;
      rr.model = group.front()->model;
      rr.breakpoints = group.front()->breakpoints;
      const double n = static_cast<double>(group.size());
      for (const FitRow *row : group) {
        rr.nrmse_fit_pct += row->report.nrmse_fit_pct / n;
        rr.r_squared += row->report.r_squared / n;
        rr.rmse_abs += row->report.rmse_abs / n;
        // Vertical errors are normalized by the maximum force,
        // mediolateral by the range.
        rr.rmse_norm_pct += (key.second == "vertical"
                                 ? row->report.rmse_norm_max_pct
                                 : row->report.rmse_norm_range_pct) /
                            n;
      }
      rr.rmse_norm_rounded_pct = static_cast<int>(std::lround(rr.rmse_norm_pct));
      out.push_back(std::move(rr));
    }
  }
  return out;
}

void write_report_csv(const std::string &path, const std::vector<ReportRow> &rows) {
  CsvWriter csv(path);
  csv.write_header({"run", "side", "component", "model", "breakpoints",
                    "nrmse_fit_pct", "r_squared", "rmse_abs", "rmse_norm_pct",
                    "rmse_norm_rounded_pct"});
  for (const auto &row : rows)
    csv.write_cells({row.run, row.side, row.component, row.model,
                     std::to_string(row.breakpoints),
                     format_double(row.nrmse_fit_pct),
                     format_double(row.r_squared), format_double(row.rmse_abs),
                     format_double(row.rmse_norm_pct),
                     std::to_string(row.rmse_norm_rounded_pct)});
}

} // namespace insole
