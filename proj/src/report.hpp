#pragma once

#include <string>
#include <vector>

#include "metrics.hpp"

namespace insole {

// One fit-report CSV row: a model evaluated on one dataset.
struct FitRow {
  std::string side;      // left / right
  std::string component; // vertical / mediolateral
  std::string model;     // linear / hw
  std::string role;      // identification / validation
  std::string dataset;   // trial label
  std::size_t breakpoints = 0;
  bool selected = false;
  FitReport report;
};

void write_fit_report_csv(const std::string &path, const std::vector<FitRow> &rows);
std::vector<FitRow> read_fit_report_csv(const std::string &path);

// Consolidated comparison table: one row per (run, side, component) with the
// selected model's validation-average metrics (R^2, absolute RMSE, rounded
// normalized RMSE).
struct ReportRow {
  std::string run;
  std::string side;
  std::string component;
  std::string model;
  std::size_t breakpoints = 0;
  double nrmse_fit_pct = 0.0;
  double r_squared = 0.0;
  double rmse_abs = 0.0;
  double rmse_norm_pct = 0.0; // max-normalized for V, range-normalized for ML
  int rmse_norm_rounded_pct = 0;
};

std::vector<ReportRow> consolidate(const std::vector<std::pair<std::string, std::vector<FitRow>>> &runs);
void write_report_csv(const std::string &path, const std::vector<ReportRow> &rows);

} // namespace insole
