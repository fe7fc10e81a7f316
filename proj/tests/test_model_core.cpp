#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "error.hpp"
#include "model.hpp"
#include "rng.hpp"

using namespace insole;

namespace {

// O(K) linear-scan evaluator, the independent oracle for pwl_eval.
double pwl_scan_eval(const std::vector<double> &xs, const std::vector<double> &ys,
                     double x) {
  std::size_t seg = 0;
  while (seg + 2 < xs.size() && x >= xs[seg + 1])
    ++seg;
  if (x <= xs.front())
    seg = 0;
  const double t = (x - xs[seg]) / (xs[seg + 1] - xs[seg]);
  return (1.0 - t) * ys[seg] + t * ys[seg + 1];
}

std::array<std::vector<double>, 4> constant_input(double value, std::size_t n) {
  std::array<std::vector<double>, 4> u;
  for (auto &ch : u)
    ch.assign(n, value);
  return u;
}

HwModel sample_hw_model() {
  std::array<PwlFunction, 4> f1{
      PwlFunction({-60.0, -30.0, -10.0, 0.0}, {-50.0, -35.0, -8.0, 0.0}),
      PwlFunction({-60.0, -20.0, 0.0}, {-70.0, -15.0, 0.0}),
      PwlFunction({-60.0, -40.0, -20.0, 0.0}, {-45.0, -38.0, -22.0, 1.0}),
      PwlFunction({-60.0, 0.0}, {-60.0, 0.0})};
  LtiBlock g;
  g.num = {std::vector<double>{0.8, 0.1}, {0.4}, {0.5, -0.2}, {0.3}};
  g.delay = {0, 1, 0, 0};
  g.den = {-0.6, 0.08};
  PwlFunction f2({-200.0, -50.0, 0.0, 100.0, 300.0},
                 {-120.0, -40.0, 5.0, 130.0, 420.0});
  return HwModel{f1, g, f2, {}, {}};
}

} // namespace

TEST_CASE("pwl_eval interpolates and extrapolates with end slopes") {
  PwlFunction f({0.0, 1.0}, {0.0, 1.0});
  CHECK(f(0.5) == doctest::Approx(0.5));
  CHECK(f(2.0) == doctest::Approx(2.0));
  CHECK(f(-3.0) == doctest::Approx(-3.0));
}

TEST_CASE("pwl_eval matches the linear-scan oracle on random functions") {
  Rng rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> xs(7), ys(7);
    double x = rng.uniform(-10.0, -5.0);
    for (int i = 0; i < 7; ++i) {
      xs[static_cast<std::size_t>(i)] = x;
      x += rng.uniform(0.5, 3.0);
      ys[static_cast<std::size_t>(i)] = rng.uniform(-20.0, 20.0);
    }
    PwlFunction f(xs, ys);
    for (int i = 0; i < 1000; ++i) {
      const double probe = rng.uniform(-15.0, 20.0);
      CHECK(f(probe) == pwl_scan_eval(xs, ys, probe));
    }
  }
}

TEST_CASE("pwl monotonicity tracks the y-values") {
  CHECK(PwlFunction({0.0, 1.0, 2.0}, {0.0, 2.0, 3.0}).monotone_y());
  CHECK(PwlFunction({0.0, 1.0, 2.0}, {3.0, 1.0, 0.0}).monotone_y());
  CHECK_FALSE(PwlFunction({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0}).monotone_y());
}

TEST_CASE("pwl rejects non-increasing breakpoints") {
  CHECK_THROWS_AS(PwlFunction({0.0, 0.0}, {0.0, 1.0}), PipelineError);
  CHECK_THROWS_AS(PwlFunction({1.0}, {1.0}), PipelineError);
}

TEST_CASE("quantile knots are strictly increasing even on clumped data") {
  std::vector<double> data(1000, 0.0);
  for (std::size_t i = 0; i < 100; ++i)
    data[i] = -40.0 + static_cast<double>(i) * 0.4;
  const auto knots = quantile_knots(data, 6);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    CHECK(knots[i] < knots[i + 1]);
  CHECK_THROWS_AS(quantile_knots(std::vector<double>(50, 1.0), 5), PipelineError);
}

TEST_CASE("lti unit gain is a passthrough") {
  const LtiBlock g = LtiBlock::unit_gain(0);
  std::array<std::vector<double>, 4> u = constant_input(0.0, 50);
  Rng rng(2);
  for (double &x : u[0])
    x = rng.uniform(-1.0, 1.0);
  const auto y = lti_apply(g, u);
  CHECK(y == u[0]);
}

TEST_CASE("one-pole step response converges to the geometric limit") {
  LtiBlock g;
  g.num = {std::vector<double>{1.0}, {0.0}, {0.0}, {0.0}};
  g.den = {-0.5};
  const auto y = lti_apply(g, constant_input(1.0, 200));
  CHECK(y.back() == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("random stable block matches the truncated-convolution oracle") {
  Rng rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    LtiBlock g;
    // Three real poles well inside the unit circle.
    const double p1 = rng.uniform(-0.7, 0.7), p2 = rng.uniform(-0.6, 0.6),
                 p3 = rng.uniform(-0.5, 0.5);
    g.den = {-(p1 + p2 + p3), p1 * p2 + p1 * p3 + p2 * p3, -p1 * p2 * p3};
    for (int c = 0; c < kNumChannels; ++c) {
      g.num[c] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                  rng.uniform(-1.0, 1.0)};
      g.delay[c] = static_cast<std::size_t>(rng.next_u64() % 3);
    }
    REQUIRE(is_stable(g));

    std::array<std::vector<double>, 4> u;
    for (auto &ch : u) {
      ch.resize(200);
      for (double &x : ch)
        x = rng.uniform(-1.0, 1.0);
    }
    const auto y = lti_apply(g, u);

    // Direct convolution with the first 1000 impulse-response samples.
    std::array<std::vector<double>, 4> h;
    for (int c = 0; c < kNumChannels; ++c)
      h[c] = impulse_response(g, c, 1000);
    for (std::size_t i = 0; i < y.size(); ++i) {
      double acc = 0.0;
      for (int c = 0; c < kNumChannels; ++c)
        for (std::size_t j = 0; j <= i; ++j)
          acc += h[c][j] * u[c][i - j];
      CHECK(std::abs(acc - y[i]) < 1e-9);
    }
  }
}

TEST_CASE("unstable denominators are rejected and projectable") {
  LtiBlock g;
  g.num = {std::vector<double>{1.0}, {0.0}, {0.0}, {0.0}};
  g.den = {-1.25}; // pole at 1.25
  CHECK_FALSE(is_stable(g));
  CHECK_THROWS_AS(lti_apply(g, constant_input(1.0, 10)), PipelineError);

  stabilize(g);
  CHECK(is_stable(g));
  // Reflection maps |z| = 1.25 to 0.99 / 1.25.
  CHECK(-g.den[0] == doctest::Approx(0.99 / 1.25));

  SUBCASE("complex pair outside the circle is reflected inside") {
    LtiBlock g2;
    g2.num = g.num;
    const double r = 1.4, theta = 0.8;
    g2.den = {-2.0 * r * std::cos(theta), r * r};
    CHECK_FALSE(is_stable(g2));
    stabilize(g2);
    CHECK(is_stable(g2));
    for (const auto &root : denominator_roots(g2.den))
      CHECK(std::abs(root) == doctest::Approx(0.99 / 1.4).epsilon(1e-6));
  }
}

TEST_CASE("lti_apply is linear in its input") {
  Rng rng(17);
  LtiBlock g;
  g.num = {std::vector<double>{0.7, -0.2}, {0.3}, {0.1, 0.1}, {0.5}};
  g.den = {-0.4, 0.05};
  std::array<std::vector<double>, 4> u, v, mix;
  const double alpha = 1.7, beta = -0.6;
  for (int c = 0; c < kNumChannels; ++c) {
    u[c].resize(300);
    v[c].resize(300);
    mix[c].resize(300);
    for (std::size_t i = 0; i < 300; ++i) {
      u[c][i] = rng.uniform(-2.0, 2.0);
      v[c][i] = rng.uniform(-2.0, 2.0);
      mix[c][i] = alpha * u[c][i] + beta * v[c][i];
    }
  }
  const auto yu = lti_apply(g, u), yv = lti_apply(g, v), ym = lti_apply(g, mix);
  for (std::size_t i = 0; i < ym.size(); ++i)
    CHECK(std::abs(ym[i] - (alpha * yu[i] + beta * yv[i])) < 1e-10);
}

TEST_CASE("hw_simulate with identity nonlinearities is the linear block") {
  HwModel m{{PwlFunction::identity(-100.0, 10.0, 5),
             PwlFunction::identity(-100.0, 10.0, 5),
             PwlFunction::identity(-100.0, 10.0, 5),
             PwlFunction::identity(-100.0, 10.0, 5)},
            LtiBlock::unit_gain(0),
            PwlFunction::identity(-100.0, 10.0, 5),
            {},
            {}};
  std::array<std::vector<double>, 4> dr = constant_input(0.0, 100);
  Rng rng(9);
  for (double &x : dr[0])
    x = rng.uniform(-60.0, 5.0);
  const auto f = hw_simulate(m, dr);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(f[i] == doctest::Approx(dr[0][i]).epsilon(1e-12));
}

TEST_CASE("clamping output nonlinearity keeps the estimate nonnegative") {
  // f2 flattens everything below zero; slight positive slope keeps the
  // breakpoints strictly informative.
  HwModel m = sample_hw_model();
  m.f2 = PwlFunction({-1000.0, 0.0, 1000.0}, {0.0, 0.0, 1000.0});
  std::array<std::vector<double>, 4> dr;
  Rng rng(13);
  for (auto &ch : dr) {
    ch.resize(400);
    for (double &x : ch)
      x = rng.uniform(-60.0, 5.0);
  }
  for (double f : hw_simulate(m, dr))
    CHECK(f >= 0.0);
}

TEST_CASE("hw_simulate equals the naive three-stage oracle bitwise") {
  const HwModel m = sample_hw_model();
  std::array<std::vector<double>, 4> dr;
  Rng rng(37);
  for (auto &ch : dr) {
    ch.resize(500);
    for (double &x : ch)
      x = rng.uniform(-55.0, 2.0);
  }
  const auto fast = hw_simulate(m, dr);

  // Stage by stage, hand-rolled loops.
  std::array<std::vector<double>, 4> v;
  for (int c = 0; c < kNumChannels; ++c) {
    v[c].resize(dr[c].size());
    for (std::size_t i = 0; i < dr[c].size(); ++i)
      v[c][i] = m.f1[c](dr[c][i]);
  }
  std::vector<double> w(dr[0].size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    double acc = 0.0;
    for (int c = 0; c < kNumChannels; ++c)
      for (std::size_t j = 0; j < m.g.num[c].size(); ++j) {
        const std::size_t lag = m.g.delay[c] + j;
        if (i >= lag)
          acc += m.g.num[c][j] * v[c][i - lag];
      }
    for (std::size_t j = 0; j < m.g.den.size(); ++j)
      if (i > j)
        acc -= m.g.den[j] * w[i - 1 - j];
    w[i] = acc;
  }
  for (std::size_t i = 0; i < w.size(); ++i)
    CHECK(fast[i] == m.f2(w[i])); // bitwise
}

TEST_CASE("linear_simulate adds the offset to the block response") {
  LinearModel m{LtiBlock::unit_gain(1), 12.5, {}};
  SUBCASE("zero input returns the constant offset") {
    const auto y = linear_simulate(m, constant_input(0.0, 40));
    for (double v : y)
      CHECK(v == doctest::Approx(12.5));
  }
  SUBCASE("unit gain with zero offset is the input") {
    m.offset = 0.0;
    std::array<std::vector<double>, 4> dr = constant_input(0.0, 60);
    Rng rng(41);
    for (double &x : dr[1])
      x = rng.uniform(-5.0, 5.0);
    CHECK(linear_simulate(m, dr) == dr[1]);
  }
}

TEST_CASE("hw with identity pwl matches the linear model with same block") {
  Rng rng(43);
  LtiBlock g;
  g.num = {std::vector<double>{0.9, -0.3}, {0.2, 0.1}, {0.4}, {-0.5, 0.2}};
  g.den = {-0.7, 0.12};
  const double offset = 33.0;
  LinearModel lin{g, offset, {}};

  HwModel hw{{PwlFunction::identity(-80.0, 10.0, 6),
              PwlFunction::identity(-80.0, 10.0, 6),
              PwlFunction::identity(-80.0, 10.0, 6),
              PwlFunction::identity(-80.0, 10.0, 6)},
             g,
             PwlFunction({-500.0, 0.0, 500.0},
                         {-500.0 + offset, offset, 500.0 + offset}),
             {},
             {}};

  std::array<std::vector<double>, 4> dr;
  for (auto &ch : dr) {
    ch.resize(800);
    for (double &x : ch)
      x = rng.uniform(-60.0, 5.0);
  }
  const auto ylin = linear_simulate(lin, dr);
  const auto yhw = hw_simulate(hw, dr);
  for (std::size_t i = 0; i < ylin.size(); ++i)
    CHECK(std::abs(ylin[i] - yhw[i]) < 1e-12 * std::max(1.0, std::abs(ylin[i])));
}

TEST_CASE("bounded input gives bounded output over 1e5 samples") {
  const HwModel m = sample_hw_model();
  std::array<std::vector<double>, 4> dr;
  Rng rng(47);
  for (auto &ch : dr) {
    ch.resize(100000);
    for (double &x : ch)
      x = rng.uniform(-80.0, 10.0);
  }
  for (double f : hw_simulate(m, dr)) {
    CHECK(std::isfinite(f));
    CHECK(std::abs(f) < 1e6);
  }
}

TEST_CASE("model serialization round-trips exactly") {
  HwModel hw = sample_hw_model();
  hw.meta.dataset_hash = 0xdeadbeefcafe1234ULL;
  hw.meta.breakpoints = 4;
  hw.meta.seed = 99;
  hw.meta.side = "left";
  hw.meta.component = "vertical";
  hw.norm.applied = true;
  hw.norm.f1_std = {1.5, 2.5, 0.25, 1.0};
  hw.norm.f1_mean = {-0.5, 0.125, 3.0, 0.0};

  const Model round = deserialize_model(serialize_model(Model(hw)));
  REQUIRE(std::holds_alternative<HwModel>(round));
  const HwModel &back = std::get<HwModel>(round);
  CHECK(back.g.num == hw.g.num);
  CHECK(back.g.den == hw.g.den);
  CHECK(back.g.delay == hw.g.delay);
  for (int c = 0; c < kNumChannels; ++c) {
    CHECK(back.f1[c].xs() == hw.f1[c].xs());
    CHECK(back.f1[c].ys() == hw.f1[c].ys());
  }
  CHECK(back.f2.xs() == hw.f2.xs());
  CHECK(back.f2.ys() == hw.f2.ys());
  CHECK(back.norm.f1_std == hw.norm.f1_std);
  CHECK(back.norm.f1_mean == hw.norm.f1_mean);
  CHECK(back.meta.dataset_hash == hw.meta.dataset_hash);
  CHECK(back.meta.side == "left");

  LinearModel lin{sample_hw_model().g, -17.25, {}};
  const Model round2 = deserialize_model(serialize_model(Model(lin)));
  REQUIRE(std::holds_alternative<LinearModel>(round2));
  CHECK(std::get<LinearModel>(round2).offset == lin.offset);
  CHECK(std::get<LinearModel>(round2).g.num == lin.g.num);

  SUBCASE("garbage input is a schema error") {
    CHECK_THROWS_AS(deserialize_model("not json at all"), PipelineError);
  }
}

TEST_CASE("normalization gives unit output std and preserves the simulation") {
  HwModel m = sample_hw_model();
  std::array<std::vector<double>, 4> dr;
  Rng rng(53);
  for (auto &ch : dr) {
    ch.resize(4000);
    for (double &x : ch)
      x = rng.uniform(-60.0, 0.0);
  }
  const auto before = hw_simulate(m, dr);
  normalize_hw(m, dr);
  const auto after = hw_simulate(m, dr);
  REQUIRE(m.norm.applied);
  for (std::size_t i = 0; i < before.size(); ++i)
    CHECK(after[i] ==
          doctest::Approx(before[i]).epsilon(1e-12).scale(std::abs(before[i]) + 1.0));
  for (int c = 0; c < kNumChannels; ++c) {
    std::vector<double> v(dr[c].size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = m.f1[c](dr[c][i]);
    CHECK(stddev(v) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("warmup covers the longest delay path") {
  LtiBlock g;
  g.num = {std::vector<double>{1.0, 0.5, 0.2}, {1.0}, {1.0}, {1.0}};
  g.delay = {2, 0, 0, 0};
  g.den = {-0.5, 0.1};
  CHECK(g.warmup() == 5); // nb + nk = 3 + 2 beats na = 2
}
