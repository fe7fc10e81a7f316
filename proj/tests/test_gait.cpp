#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "error.hpp"
#include "gait.hpp"
#include "rng.hpp"
#include "sim.hpp"

using namespace insole;

namespace {

ChannelSeries series(std::vector<double> v, double rate = 100.0) {
  return ChannelSeries(std::move(v), rate, Unit::Newtons);
}

// Period of exactly `span` samples, zero-force tail of each period.
std::vector<double> periodic_bumps(std::size_t cycles, std::size_t span,
                                   double peak) {
  std::vector<double> v(cycles * span, 0.0);
  for (std::size_t c = 0; c < cycles; ++c)
    for (std::size_t i = 0; i < span * 6 / 10; ++i)
      v[c * span + i] =
          peak * std::sin(M_PI * static_cast<double>(i) / (0.6 * span));
  return v;
}

} // namespace

TEST_CASE("heel strikes on simulator output land within one sample of truth") {
  GaitProfile profile;
  profile.jitter_period = 0.02;
  profile.jitter_amplitude = 0.03;
  SensorLaw law;
  const SynthTrial st = synth_trial(profile, law, 34.0, 100.0, 42, Side::Left);
  const auto events = detect_heel_strikes(st.trial.grf.vertical);

  REQUIRE(events.size() == st.event_times_s.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const double detected = static_cast<double>(events[i]) / 100.0;
    CHECK(std::abs(detected - st.event_times_s[i]) <= 0.0101);
  }
}

TEST_CASE("all-zero force has no cycles") {
  CHECK_THROWS_AS(detect_heel_strikes(series(std::vector<double>(500, 0.0))),
                  PipelineError);
}

TEST_CASE("double-bounce artifacts are debounced to one event per cycle") {
  // 1.1 s cycles at 100 Hz with a dip to zero 0.2 s after each contact.
  const std::size_t span = 110, cycles = 30;
  std::vector<double> v = periodic_bumps(cycles, span, 700.0);
  for (std::size_t c = 0; c < cycles; ++c)
    for (std::size_t i = 20; i < 24; ++i)
      v[c * span + i] = 0.0;
  const auto events = detect_heel_strikes(series(v));
  CHECK(events.size() == cycles - 1 + 1); // every cycle incl. the first rise
  for (std::size_t i = 1; i < events.size(); ++i)
    CHECK(events[i] - events[i - 1] == span);
}

TEST_CASE("detection threshold is relative to the signal scale") {
  std::vector<double> v = periodic_bumps(20, 110, 700.0);
  const auto base = detect_heel_strikes(series(v));
  for (double &x : v)
    x *= 37.5;
  CHECK(detect_heel_strikes(series(v)) == base);
}

TEST_CASE("segmenting a sawtooth at its resets gives identical rows") {
  const std::size_t span = 100, cycles = 8;
  std::vector<double> v(cycles * span);
  std::vector<std::size_t> events;
  for (std::size_t c = 0; c < cycles; ++c) {
    events.push_back(c * span);
    for (std::size_t i = 0; i < span; ++i)
      v[c * span + i] = static_cast<double>(i);
  }
  const GaitSegmentation seg = segment_cycles(series(v), events);
  REQUIRE(seg.cycles.size() == cycles - 1);
  for (const auto &cycle : seg.cycles)
    for (std::size_t p = 0; p < kCyclePoints; ++p)
      CHECK(cycle[p] == seg.cycles.front()[p]); // grid-aligned, bit-identical
}

TEST_CASE("cycles far from the median span are excluded with a reason") {
  std::vector<std::size_t> events{0, 100, 200, 500, 600, 700, 800};
  std::vector<double> v(900, 1.0);
  const GaitSegmentation seg = segment_cycles(series(v), events);
  REQUIRE(seg.excluded_cycles.size() == 1);
  CHECK(seg.excluded_cycles[0].index == 2); // the 300-sample span
  CHECK_FALSE(seg.excluded_cycles[0].reason.empty());
  CHECK(seg.cycles.size() == events.size() - 1 - 1);
}

TEST_CASE("resampled sine cycles match the analytic waveform") {
  const double rate = 1000.0, period_s = 0.97;
  const std::size_t cycles = 12;
  std::vector<double> v(static_cast<std::size_t>(cycles * period_s * rate) + 1);
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = std::sin(2.0 * M_PI * static_cast<double>(i) / (period_s * rate));
  std::vector<std::size_t> events;
  for (std::size_t c = 0; c + 1 < cycles; ++c)
    events.push_back(static_cast<std::size_t>(
        std::llround(static_cast<double>(c) * period_s * rate)));
  const GaitSegmentation seg = segment_cycles(series(v, rate), events);
  for (const auto &cycle : seg.cycles)
    for (std::size_t p = 0; p < kCyclePoints; ++p) {
      const double expected = std::sin(2.0 * M_PI * static_cast<double>(p) / 100.0);
      CHECK(std::abs(cycle[p] - expected) < 1e-3);
    }
}

TEST_CASE("fewer than two events cannot be segmented") {
  CHECK_THROWS_AS(segment_cycles(series(std::vector<double>(100, 1.0)), {5}),
                  PipelineError);
}

TEST_CASE("consecutive cycles share their boundary sample") {
  std::vector<double> v(1000);
  Rng rng(3);
  for (double &x : v)
    x = rng.uniform(0.0, 10.0);
  std::vector<std::size_t> events{0, 250, 500, 750, 999};
  const GaitSegmentation seg = segment_cycles(series(v), events);
  for (std::size_t c = 0; c + 1 < seg.cycles.size(); ++c)
    CHECK(seg.cycles[c][100] == doctest::Approx(seg.cycles[c + 1][0]));
}

TEST_CASE("cycle statistics") {
  GaitSegmentation seg;
  seg.heel_strike_indices = {0, 1, 2};

  SUBCASE("identical cycles have zero deviation") {
    std::array<double, kCyclePoints> row{};
    for (std::size_t p = 0; p < kCyclePoints; ++p)
      row[p] = static_cast<double>(p);
    seg.cycles = {row, row, row};
    const CycleStats stats = cycle_stats(seg);
    for (std::size_t p = 0; p < kCyclePoints; ++p) {
      CHECK(stats.mean[p] == row[p]);
      CHECK(stats.std[p] == 0.0);
    }
  }

  SUBCASE("two-point sample standard deviation") {
    std::array<double, kCyclePoints> zeros{}, twos{};
    twos.fill(2.0);
    seg.cycles = {zeros, twos};
    const CycleStats stats = cycle_stats(seg);
    for (std::size_t p = 0; p < kCyclePoints; ++p) {
      CHECK(stats.mean[p] == doctest::Approx(1.0));
      CHECK(stats.std[p] == doctest::Approx(std::sqrt(2.0)));
    }
  }

  SUBCASE("noisy cycles converge to the truth waveform") {
    Rng rng(4);
    const double sigma = 2.0;
    seg.cycles.clear();
    for (int c = 0; c < 100; ++c) {
      std::array<double, kCyclePoints> row{};
      for (std::size_t p = 0; p < kCyclePoints; ++p)
        row[p] = 5.0 * std::sin(2.0 * M_PI * static_cast<double>(p) / 100.0) +
                 rng.normal(0.0, sigma);
      seg.cycles.push_back(row);
    }
    const CycleStats stats = cycle_stats(seg);
    for (std::size_t p = 0; p < kCyclePoints; ++p) {
      const double truth = 5.0 * std::sin(2.0 * M_PI * static_cast<double>(p) / 100.0);
      CHECK(std::abs(stats.mean[p] - truth) < 3.0 * sigma / 10.0);
    }
  }

  SUBCASE("no included cycles is an error") {
    seg.cycles.clear();
    CHECK_THROWS_AS(cycle_stats(seg), PipelineError);
  }
}

namespace {

CycleStats stats_with_window(double level, int from_pct, int to_pct) {
  CycleStats cs;
  cs.n = 10;
  for (int p = from_pct; p <= to_pct && p < static_cast<int>(kCyclePoints); ++p)
    cs.mean[static_cast<std::size_t>(p)] = level;
  return cs;
}

} // namespace

TEST_CASE("all-quiet sensors label the whole cycle as swing") {
  std::array<CycleStats, 4> sensors{};
  for (auto &s : sensors)
    s.n = 5;
  CycleStats grf{};
  grf.n = 5;
  const PhaseTimeline timeline = classify_phases(sensors, grf);
  for (auto label : timeline.labels)
    CHECK(label == Phase::Swing);
}

TEST_CASE("heel active alone up to 40 percent ends heel phases there") {
  std::array<CycleStats, 4> sensors{stats_with_window(-30.0, 0, 40),
                                    CycleStats{}, CycleStats{}, CycleStats{}};
  for (auto &s : sensors)
    s.n = 5;
  CycleStats grf{};
  grf.n = 5;
  const PhaseTimeline timeline = classify_phases(sensors, grf);
  for (std::size_t p = 0; p <= 38; ++p)
    CHECK(timeline.labels[p] == Phase::HeelStrike);
  for (std::size_t p = 41; p < kCyclePoints; ++p)
    CHECK(timeline.labels[p] == Phase::Swing);
}

TEST_CASE("staggered activations recover the heel-to-toe phase sequence") {
  std::array<CycleStats, 4> sensors{
      stats_with_window(-40.0, 0, 40), stats_with_window(-35.0, 8, 48),
      stats_with_window(-30.0, 16, 55), stats_with_window(-25.0, 24, 62)};
  CycleStats grf = stats_with_window(600.0, 0, 62);
  const PhaseTimeline timeline = classify_phases(sensors, grf);

  CHECK(timeline.consistent_ordering);
  CHECK(timeline.labels[2] == Phase::HeelStrike);
  CHECK(timeline.labels[12] == Phase::Loading);
  CHECK(timeline.labels[30] == Phase::MidStance);
  CHECK(timeline.labels[50] == Phase::Terminal);
  CHECK(timeline.labels[80] == Phase::Swing);

  // Onsets and releases both follow HL -> MF -> MT -> TO.
  for (int c = 0; c + 1 < kNumChannels; ++c) {
    CHECK(timeline.onset_pct[c] <= timeline.onset_pct[c + 1]);
    CHECK(timeline.release_pct[c] <= timeline.release_pct[c + 1]);
  }

  SUBCASE("violating the order sets the flag without failing") {
    std::swap(sensors[0], sensors[3]); // toe loads before the heel
    const PhaseTimeline odd = classify_phases(sensors, grf);
    CHECK_FALSE(odd.consistent_ordering);
  }
}

TEST_CASE("stance labels precede swing exactly once on nominal data") {
  GaitProfile profile;
  SensorLaw law;
  const SynthTrial st = synth_trial(profile, law, 30.0, 100.0, 9, Side::Left);
  const auto events = detect_heel_strikes(st.trial.grf.vertical);
  std::array<CycleStats, 4> sensors;
  for (int c = 0; c < kNumChannels; ++c)
    sensors[c] = cycle_stats(segment_cycles(st.trial.insole.channels[c], events));
  const CycleStats grf = cycle_stats(segment_cycles(st.trial.grf.vertical, events));
  const PhaseTimeline timeline = classify_phases(sensors, grf);

  int stance_to_swing = 0;
  for (std::size_t p = 1; p < kCyclePoints; ++p)
    if (timeline.labels[p] == Phase::Swing && timeline.labels[p - 1] != Phase::Swing)
      ++stance_to_swing;
  CHECK(stance_to_swing == 1);
  CHECK(timeline.labels.front() != Phase::Swing);
  CHECK(timeline.labels.back() == Phase::Swing);
}

TEST_CASE("sensor-only detection mirrors the force-based detector") {
  GaitProfile profile;
  SensorLaw law;
  law.noise_sigma_ohm.fill(0.5);
  const SynthTrial st = synth_trial(profile, law, 25.0, 100.0, 4, Side::Right);
  const auto from_force = detect_heel_strikes(st.trial.grf.vertical);
  const auto from_sensor =
      detect_heel_strikes_from_sensor(st.trial.insole.channels[0]);
  REQUIRE(from_sensor.size() == from_force.size());
  for (std::size_t i = 0; i < from_force.size(); ++i)
    CHECK(std::abs(static_cast<double>(from_sensor[i]) -
                   static_cast<double>(from_force[i])) <= 5.0);
}
