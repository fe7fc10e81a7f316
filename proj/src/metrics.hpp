#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace insole {

enum class NormMode { Max, Range };

struct FitReport {
  double nrmse_fit_pct = 0.0;
  double r_squared = 0.0;        // on averaged gait cycles
  double r_squared_series = 0.0; // on the raw (warm-up excluded) series
  double rmse_abs = 0.0;         // N
  double rmse_abs_cycle = 0.0;   // N, on averaged cycles
  double rmse_norm_max_pct = 0.0;
  double rmse_norm_range_pct = 0.0;
  std::size_t n_samples = 0;
  std::size_t warmup_excluded = 0;
};

// 100 (1 - ||f - fhat|| / ||f - mean(f)||), two-norm. Throws
// ConstantReference when f is constant.
double nrmse_fit(std::span<const double> f, std::span<const double> fhat);

// 1 - SS_res / SS_tot; reported as-is (can be negative).
double r_squared(std::span<const double> f, std::span<const double> fhat);

double rmse(std::span<const double> f, std::span<const double> fhat);

// 100 * RMSE / max(f) or 100 * RMSE / (max(f) - min(f)). Throws
// DegenerateNormalizer when the normalizer is not positive.
double rmse_normalized(std::span<const double> f, std::span<const double> fhat,
                       NormMode mode);

// Every metric on the warm-up-excluded series; the cycle-based entries
// (r_squared, rmse_abs_cycle) compare the averaged gait cycles and are NaN
// when avg series are empty.
FitReport full_report(const std::vector<double> &measured,
                      const std::vector<double> &estimated,
                      std::size_t warmup,
                      const std::vector<double> &measured_cycle_avg,
                      const std::vector<double> &estimated_cycle_avg);

} // namespace insole
