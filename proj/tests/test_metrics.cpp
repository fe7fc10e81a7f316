#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "error.hpp"
#include "metrics.hpp"
#include "rng.hpp"

using namespace insole;

namespace {

std::vector<double> random_series(Rng &rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double &x : v)
    x = rng.uniform(lo, hi);
  return v;
}

// Brute-force sums, the oracle for r_squared and rmse_normalized.
double r2_oracle(const std::vector<double> &f, const std::vector<double> &fhat) {
  const double fbar =
      std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    ss_res += (f[i] - fhat[i]) * (f[i] - fhat[i]);
    ss_tot += (f[i] - fbar) * (f[i] - fbar);
  }
  return 1.0 - ss_res / ss_tot;
}

double rmse_norm_oracle(const std::vector<double> &f,
                        const std::vector<double> &fhat, bool by_max) {
  double ss = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    ss += (f[i] - fhat[i]) * (f[i] - fhat[i]);
  const double rmse_v = std::sqrt(ss / static_cast<double>(f.size()));
  const double mx = *std::max_element(f.begin(), f.end());
  const double mn = *std::min_element(f.begin(), f.end());
  return 100.0 * rmse_v / (by_max ? mx : mx - mn);
}

} // namespace

TEST_CASE("nrmse_fit endpoints") {
  const std::vector<double> f{3.0, 7.0, -2.0, 4.0, 8.0};
  CHECK(nrmse_fit(f, f) == doctest::Approx(100.0));

  const double fbar = std::accumulate(f.begin(), f.end(), 0.0) / 5.0;
  CHECK(nrmse_fit(f, std::vector<double>(5, fbar)) == doctest::Approx(0.0));
}

TEST_CASE("nrmse_fit hand-computed two-norm case") {
  const std::vector<double> f{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> fhat{0.0, 1.0, 2.0, 4.0};
  // ||f - fhat|| = 1, ||f - 1.5|| = sqrt(5): fit = 100 (1 - 1/sqrt(5)).
  CHECK(nrmse_fit(f, fhat) ==
        doctest::Approx(100.0 * (1.0 - 1.0 / std::sqrt(5.0))).epsilon(1e-12));
  CHECK(std::abs(nrmse_fit(f, fhat) - 55.28) < 0.01);
}

TEST_CASE("nrmse_fit rejects a constant reference") {
  CHECK_THROWS_AS(nrmse_fit(std::vector<double>(4, 1.0), std::vector<double>(4, 1.0)),
                  PipelineError);
}

TEST_CASE("nrmse_fit shift behavior") {
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const auto f = random_series(rng, 64, -10.0, 10.0);
    auto fhat = f;
    for (double &x : fhat)
      x += rng.normal(0.0, 0.5);
    const double base = nrmse_fit(f, fhat);

    // Common shift leaves the fit unchanged.
    const double shift = rng.uniform(-100.0, 100.0);
    std::vector<double> fs = f, fhs = fhat;
    for (double &x : fs)
      x += shift;
    for (double &x : fhs)
      x += shift;
    CHECK(nrmse_fit(fs, fhs) == doctest::Approx(base).epsilon(1e-9));

    // Shifting only the estimate strictly lowers a non-perfect fit.
    std::vector<double> fh_only = fhat;
    for (double &x : fh_only)
      x += 3.0;
    CHECK(nrmse_fit(f, fh_only) < base);
  }

  // A perfect fit stays perfect only under the common shift.
  const std::vector<double> f{1.0, 2.0, 3.0};
  std::vector<double> moved{2.0, 3.0, 4.0};
  CHECK(nrmse_fit(f, f) == doctest::Approx(100.0));
  CHECK(nrmse_fit(f, moved) < 100.0);
}

TEST_CASE("r_squared endpoints and worked example") {
  const std::vector<double> f{1.0, 4.0, 2.0, 8.0, 5.0};
  CHECK(r_squared(f, f) == doctest::Approx(1.0));
  CHECK(r_squared(f, std::vector<double>(5, 4.0)) == doctest::Approx(0.0));

  const std::vector<double> fhat{1.5, 3.5, 2.5, 7.0, 5.5};
  CHECK(r_squared(f, fhat) == doctest::Approx(r2_oracle(f, fhat)));
}

TEST_CASE("r_squared and rmse_normalized match brute-force oracles") {
  Rng rng(6);
  for (int rep = 0; rep < 1000; ++rep) {
    auto f = random_series(rng, 101, 0.5, 100.0);
    auto fhat = random_series(rng, 101, 0.0, 100.0);
    const double r2 = r_squared(f, fhat);
    CHECK(std::abs(r2 - r2_oracle(f, fhat)) < 1e-12 * std::max(1.0, std::abs(r2)));
    CHECK(r2 <= 1.0);
    const double nm = rmse_normalized(f, fhat, NormMode::Max);
    const double nr = rmse_normalized(f, fhat, NormMode::Range);
    CHECK(std::abs(nm - rmse_norm_oracle(f, fhat, true)) < 1e-12 * nm);
    CHECK(std::abs(nr - rmse_norm_oracle(f, fhat, false)) < 1e-12 * nr);
  }
}

TEST_CASE("r_squared equals one only for identical series") {
  const std::vector<double> f{1.0, 2.0, 3.0, 4.0};
  std::vector<double> fhat = f;
  CHECK(r_squared(f, fhat) == doctest::Approx(1.0).epsilon(1e-15));
  fhat[2] += 1e-3;
  CHECK(r_squared(f, fhat) < 1.0);
}

TEST_CASE("rmse_normalized basics") {
  const std::vector<double> f{100.0, 400.0, 800.0, 0.0};
  CHECK(rmse_normalized(f, f, NormMode::Max) == doctest::Approx(0.0));
  CHECK(rmse_normalized(f, f, NormMode::Range) == doctest::Approx(0.0));

  // Reporting shape: 37.3 N RMSE against an 800 N peak is 4.66%.
  std::vector<double> fhat = f;
  for (double &x : fhat)
    x += 37.3;
  CHECK(rmse_normalized(f, fhat, NormMode::Max) ==
        doctest::Approx(100.0 * 37.3 / 800.0).epsilon(1e-12));

  SUBCASE("degenerate normalizers are rejected") {
    const std::vector<double> flat(4, 5.0);
    CHECK_THROWS_AS(rmse_normalized(flat, flat, NormMode::Range), PipelineError);
    const std::vector<double> nonpos{-3.0, -1.0, -2.0, -0.5};
    CHECK_THROWS_AS(rmse_normalized(nonpos, nonpos, NormMode::Max), PipelineError);
  }
}

TEST_CASE("rmse_normalized(max) is invariant under common positive scaling") {
  Rng rng(8);
  for (int rep = 0; rep < 300; ++rep) {
    const auto f = random_series(rng, 50, 1.0, 50.0);
    const auto fhat = random_series(rng, 50, 0.0, 50.0);
    const double base = rmse_normalized(f, fhat, NormMode::Max);
    const double a = std::exp(rng.uniform(-2.0, 4.0));
    std::vector<double> fs = f, fhs = fhat;
    for (double &x : fs)
      x *= a;
    for (double &x : fhs)
      x *= a;
    CHECK(rmse_normalized(fs, fhs, NormMode::Max) ==
          doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("time-series metrics ignore sample order") {
  Rng rng(10);
  auto f = random_series(rng, 128, 1.0, 20.0);
  auto fhat = random_series(rng, 128, 0.0, 20.0);
  const double fit = nrmse_fit(f, fhat);
  const double err = rmse(f, fhat);
  const double nm = rmse_normalized(f, fhat, NormMode::Max);

  // Joint shuffle with a fixed permutation.
  std::vector<std::size_t> perm(f.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    perm[i] = i;
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[rng.next_u64() % i]);
  std::vector<double> f2(f.size()), fhat2(f.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    f2[i] = f[perm[i]];
    fhat2[i] = fhat[perm[i]];
  }
  CHECK(nrmse_fit(f2, fhat2) == doctest::Approx(fit).epsilon(1e-12));
  CHECK(rmse(f2, fhat2) == doctest::Approx(err).epsilon(1e-12));
  CHECK(rmse_normalized(f2, fhat2, NormMode::Max) == doctest::Approx(nm).epsilon(1e-12));
}

TEST_CASE("full_report assembles every metric with warm-up exclusion") {
  Rng rng(12);
  std::vector<double> measured = random_series(rng, 500, 10.0, 700.0);
  std::vector<double> estimated = measured;
  for (double &x : estimated)
    x += rng.normal(0.0, 5.0);
  // Corrupt the warm-up region; the report must not see it.
  estimated[0] = 1e9;
  estimated[1] = -1e9;

  const FitReport report = full_report(measured, estimated, 2, {}, {});
  CHECK(report.warmup_excluded == 2);
  CHECK(report.n_samples == 498);
  CHECK(report.nrmse_fit_pct > 90.0);
  CHECK(report.rmse_abs < 20.0);
  CHECK(std::isnan(report.r_squared)); // no cycle averages provided

  const std::vector<double> avg_m = random_series(rng, 101, 0.0, 700.0);
  std::vector<double> avg_e = avg_m;
  for (double &x : avg_e)
    x += 1.0;
  const FitReport with_cycles = full_report(measured, estimated, 2, avg_m, avg_e);
  CHECK(with_cycles.r_squared == doctest::Approx(r2_oracle(avg_m, avg_e)));
  CHECK(with_cycles.rmse_abs_cycle == doctest::Approx(1.0));
}
