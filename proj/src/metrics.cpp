#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace insole {

namespace {

void check_pair(std::span<const double> f, std::span<const double> fhat) {
  require(f.size() == fhat.size(), Fault::InvalidArgument,
          "series lengths differ");
  require(f.size() >= 2, Fault::InvalidArgument, "need at least 2 samples");
}

double mean_of(std::span<const double> f) {
  double s = 0.0;
  for (double x : f)
    s += x;
  return s / static_cast<double>(f.size());
}

} // namespace

double nrmse_fit(std::span<const double> f, std::span<const double> fhat) {
  check_pair(f, fhat);
  const double fbar = mean_of(f);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    num += (f[i] - fhat[i]) * (f[i] - fhat[i]);
    den += (f[i] - fbar) * (f[i] - fbar);
  }
  require(den > 0.0, Fault::ConstantReference,
          "reference series is constant, NRMSE fit undefined");
  return 100.0 * (1.0 - std::sqrt(num) / std::sqrt(den));
}

double r_squared(std::span<const double> f, std::span<const double> fhat) {
  check_pair(f, fhat);
  const double fbar = mean_of(f);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    ss_res += (f[i] - fhat[i]) * (f[i] - fhat[i]);
    ss_tot += (f[i] - fbar) * (f[i] - fbar);
  }
  require(ss_tot > 0.0, Fault::ConstantReference,
          "reference series is constant, R^2 undefined");
  return 1.0 - ss_res / ss_tot;
}

double rmse(std::span<const double> f, std::span<const double> fhat) {
  check_pair(f, fhat);
  double ss = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    ss += (f[i] - fhat[i]) * (f[i] - fhat[i]);
  return std::sqrt(ss / static_cast<double>(f.size()));
}

double rmse_normalized(std::span<const double> f, std::span<const double> fhat,
                       NormMode mode) {
  check_pair(f, fhat);
  const auto [mn, mx] = std::minmax_element(f.begin(), f.end());
  const double normalizer = mode == NormMode::Max ? *mx : (*mx - *mn);
  require(normalizer > 0.0, Fault::DegenerateNormalizer,
          mode == NormMode::Max ? "max(f) must be > 0"
                                : "range of f must be > 0");
  return 100.0 * rmse(f, fhat) / normalizer;
}

FitReport full_report(const std::vector<double> &measured,
                      const std::vector<double> &estimated,
                      std::size_t warmup,
                      const std::vector<double> &measured_cycle_avg,
                      const std::vector<double> &estimated_cycle_avg) {
  require(measured.size() == estimated.size(), Fault::InvalidArgument,
          "series lengths differ");
  require(measured.size() > warmup + 1, Fault::InvalidArgument,
          "series shorter than warm-up");
  std::span<const double> f(measured.data() + warmup, measured.size() - warmup);
  std::span<const double> fhat(estimated.data() + warmup,
                               estimated.size() - warmup);

  FitReport report;
  report.n_samples = f.size();
  report.warmup_excluded = warmup;
  report.nrmse_fit_pct = nrmse_fit(f, fhat);
  report.r_squared_series = r_squared(f, fhat);
  report.rmse_abs = rmse(f, fhat);
  // A normalizer can be undefined on synthetic references (non-positive
  // maximum); the report carries NaN there instead of failing outright.
  const auto [mn, mx] = std::minmax_element(f.begin(), f.end());
  report.rmse_norm_max_pct = *mx > 0.0
                                 ? rmse_normalized(f, fhat, NormMode::Max)
                                 : std::numeric_limits<double>::quiet_NaN();
  report.rmse_norm_range_pct = *mx > *mn
                                   ? rmse_normalized(f, fhat, NormMode::Range)
                                   : std::numeric_limits<double>::quiet_NaN();

  if (measured_cycle_avg.size() >= 2 &&
      measured_cycle_avg.size() == estimated_cycle_avg.size()) {
    report.r_squared = r_squared(measured_cycle_avg, estimated_cycle_avg);
    report.rmse_abs_cycle = rmse(measured_cycle_avg, estimated_cycle_avg);
  } else {
    report.r_squared = std::numeric_limits<double>::quiet_NaN();
    report.rmse_abs_cycle = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

} // namespace insole
