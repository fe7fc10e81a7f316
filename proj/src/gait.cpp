#include "gait.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace insole {

const char *to_string(Phase p) {
  switch (p) {
  case Phase::HeelStrike: return "heel-strike";
  case Phase::Loading: return "loading";
  case Phase::MidStance: return "mid-stance";
  case Phase::Terminal: return "terminal-stance";
  case Phase::Swing: return "swing";
  }
  return "?";
}

namespace {

std::vector<std::size_t> rising_crossings(const std::vector<double> &x,
                                          double threshold, double rate_hz,
                                          double min_cycle_s) {
  std::vector<std::size_t> events;
  const auto debounce = static_cast<std::size_t>(min_cycle_s * rate_hz);
  bool above = !x.empty() && x.front() >= threshold;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const bool now_above = x[i] >= threshold;
    if (now_above && !above) {
      if (events.empty() || i - events.back() >= debounce)
        events.push_back(i);
    }
    above = now_above;
  }
  return events;
}

} // namespace

std::vector<std::size_t> detect_heel_strikes(const ChannelSeries &fv,
                                             const HeelStrikeOptions &opt) {
  require(opt.threshold_frac > 0.0 && opt.threshold_frac < 0.5,
          Fault::InvalidArgument, "threshold_frac must be in (0, 0.5)");
  require(fv.size() >= 2, Fault::InvalidArgument, "signal too short");
  fv.check_finite("heel-strike input");

  std::vector<double> sorted = fv.values;
  std::sort(sorted.begin(), sorted.end());
  const double robust_max = quantile_sorted(sorted, 0.95);
  require(robust_max > 0.0, Fault::NoCyclesFound,
          "signal has no positive excursions");

  const double threshold = opt.threshold_frac * robust_max;
  auto events = rising_crossings(fv.values, threshold, fv.rate_hz, opt.min_cycle_s);
  require(!events.empty(), Fault::NoCyclesFound, "no threshold crossings found");
  return events;
}

std::vector<std::size_t> detect_heel_strikes_from_sensor(
    const ChannelSeries &heel_dr, const HeelStrikeOptions &opt) {
  // Loading decreases resistance, so the negated heel channel rises with
  // force. Shift so the quiet level sits at zero before thresholding.
  ChannelSeries negated = heel_dr;
  for (double &x : negated.values)
    x = -x;
  std::vector<double> sorted = negated.values;
  std::sort(sorted.begin(), sorted.end());
  const double base = quantile_sorted(sorted, 0.10);
  for (double &x : negated.values)
    x -= base;
  return detect_heel_strikes(negated, opt);
}

GaitSegmentation segment_cycles(const ChannelSeries &x,
                                const std::vector<std::size_t> &events) {
  require(events.size() >= 2, Fault::FewerThanTwoEvents,
          "need at least two events to segment cycles");
  for (std::size_t i = 0; i + 1 < events.size(); ++i)
    require(events[i] < events[i + 1], Fault::InvalidArgument,
            "event indices must be strictly increasing");
  require(events.back() < x.size(), Fault::InvalidArgument,
          "event index beyond series end");

  std::vector<double> spans(events.size() - 1);
  for (std::size_t i = 0; i + 1 < events.size(); ++i)
    spans[i] = static_cast<double>(events[i + 1] - events[i]);
  const double med = median(spans);

  GaitSegmentation seg;
  seg.heel_strike_indices = events;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    const double span = spans[i];
    if (span < 0.5 * med || span > 2.0 * med) {
      seg.excluded_cycles.push_back(
          {i, "span " + std::to_string(span / med) + "x median"});
      continue;
    }
    std::array<double, kCyclePoints> cycle{};
    const auto start = static_cast<double>(events[i]);
    for (std::size_t p = 0; p < kCyclePoints; ++p) {
      const double pos = start + span * static_cast<double>(p) / 100.0;
      const auto lo = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(lo);
      if (lo + 1 < x.size())
        cycle[p] = (1.0 - frac) * x.values[lo] + frac * x.values[lo + 1];
      else
        cycle[p] = x.values[std::min(lo, x.size() - 1)];
    }
    seg.cycles.push_back(cycle);
  }
  return seg;
}

CycleStats cycle_stats(const GaitSegmentation &seg) {
  require(!seg.cycles.empty(), Fault::NoCyclesFound, "no included cycles");
  CycleStats stats;
  stats.n = seg.cycles.size();
  const double n = static_cast<double>(stats.n);
  for (std::size_t p = 0; p < kCyclePoints; ++p) {
    double s = 0.0;
    for (const auto &cycle : seg.cycles)
      s += cycle[p];
    stats.mean[p] = s / n;
  }
  for (std::size_t p = 0; p < kCyclePoints; ++p) {
    if (stats.n < 2) {
      stats.std[p] = 0.0;
      continue;
    }
    double ss = 0.0;
    for (const auto &cycle : seg.cycles)
      ss += (cycle[p] - stats.mean[p]) * (cycle[p] - stats.mean[p]);
    stats.std[p] = std::sqrt(ss / (n - 1.0));
  }
  return stats;
}

PhaseTimeline classify_phases(const std::array<CycleStats, 4> &sensor_cycles,
                              const CycleStats &grf_cycle,
                              const PhaseOptions &opt) {
  // Activation per bin: |mean dR| above activation_frac of that channel's
  // |mean| range over the cycle.
  std::array<std::array<bool, kCyclePoints>, 4> active{};
  for (int c = 0; c < kNumChannels; ++c) {
    std::array<double, kCyclePoints> level{};
    double lo = std::abs(sensor_cycles[c].mean[0]);
    double hi = lo;
    for (std::size_t p = 0; p < kCyclePoints; ++p) {
      level[p] = std::abs(sensor_cycles[c].mean[p]);
      lo = std::min(lo, level[p]);
      hi = std::max(hi, level[p]);
    }
    const double range = hi - lo;
    for (std::size_t p = 0; p < kCyclePoints; ++p)
      active[c][p] = range > 0.0 && level[p] - lo > opt.activation_frac * range;
  }

  double force_max = 0.0;
  for (std::size_t p = 0; p < kCyclePoints; ++p)
    force_max = std::max(force_max, grf_cycle.mean[p]);

  PhaseTimeline timeline;
  for (int c = 0; c < kNumChannels; ++c) {
    for (std::size_t p = 0; p < kCyclePoints; ++p) {
      if (active[c][p]) {
        if (timeline.onset_pct[c] < 0)
          timeline.onset_pct[c] = static_cast<int>(p);
        timeline.release_pct[c] = static_cast<int>(p);
      }
    }
  }

  bool any_follower = false; // a non-heel channel already active
  Phase prev = Phase::Swing;
  for (std::size_t p = 0; p < kCyclePoints; ++p) {
    const bool hl = active[0][p], mf = active[1][p], mt = active[2][p],
               to = active[3][p];
    const int count = hl + mf + mt + to;
    if (mf || mt || to)
      any_follower = true;

    Phase label;
    if (count == 4) {
      label = Phase::MidStance;
    } else if (hl) {
      label = any_follower ? Phase::Loading : Phase::HeelStrike;
    } else if (count > 0) {
      label = Phase::Terminal;
    } else {
      const bool force_on = grf_cycle.n > 0 && force_max > 0.0 &&
                            grf_cycle.mean[p] > opt.force_frac * force_max;
      // Inside the force-supported span a sensor gap keeps the last stance
      // label instead of flipping to swing mid-cycle.
      label = (force_on && prev != Phase::Swing) ? prev : Phase::Swing;
    }
    timeline.labels[p] = label;
    prev = label;
  }

  // The cycle starts at the detected heel strike; sensor response lags a
  // few bins, so a leading inactive run belongs to the first stance phase.
  std::size_t first_active = 0;
  while (first_active < kCyclePoints &&
         timeline.labels[first_active] == Phase::Swing)
    ++first_active;
  if (first_active > 0 && first_active < kCyclePoints)
    for (std::size_t p = 0; p < first_active; ++p)
      timeline.labels[p] = timeline.labels[first_active];

  // Onset and release must both follow the heel-to-toe order.
  auto ordered = [](const std::array<int, 4> &marks) {
    int last = -1;
    for (int c = 0; c < kNumChannels; ++c) {
      if (marks[c] < 0)
        continue;
      if (marks[c] < last)
        return false;
      last = marks[c];
    }
    return true;
  };
  timeline.consistent_ordering =
      ordered(timeline.onset_pct) && ordered(timeline.release_pct);
  return timeline;
}

} // namespace insole
