#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "series.hpp"

namespace insole {

inline constexpr std::size_t kCyclePoints = 101; // 0%, 1%, ..., 100%

struct ExcludedCycle {
  std::size_t index;
  std::string reason;
};

struct GaitSegmentation {
  std::vector<std::size_t> heel_strike_indices;
  std::vector<std::array<double, kCyclePoints>> cycles;
  std::vector<ExcludedCycle> excluded_cycles;
};

struct CycleStats {
  std::array<double, kCyclePoints> mean{};
  std::array<double, kCyclePoints> std{};
  std::size_t n = 0;
};

enum class Phase { HeelStrike, Loading, MidStance, Terminal, Swing };
const char *to_string(Phase p);

struct PhaseTimeline {
  std::array<Phase, kCyclePoints> labels{};
  // Activation onset/release per channel in percent of cycle; -1 when the
  // channel never activates.
  std::array<int, 4> onset_pct{-1, -1, -1, -1};
  std::array<int, 4> release_pct{-1, -1, -1, -1};
  bool consistent_ordering = true;
};

struct HeelStrikeOptions {
  double threshold_frac = 0.05; // of robust max (95th percentile)
  double min_cycle_s = 0.4;     // debounce
};

// Rising crossings of threshold_frac * robust-max(fv), debounced. Throws
// NoCyclesFound when no crossing exists.
std::vector<std::size_t> detect_heel_strikes(const ChannelSeries &fv,
                                             const HeelStrikeOptions &opt = {});

// Detection from the sensors alone: the negated heel-channel resistance
// change through the same detector (fallback when no force plate exists).
std::vector<std::size_t> detect_heel_strikes_from_sensor(
    const ChannelSeries &heel_dr, const HeelStrikeOptions &opt = {});

// Each inter-event span resampled to 101 points; spans outside
// [0.5, 2] x median span are excluded with a reason.
GaitSegmentation segment_cycles(const ChannelSeries &x,
                                const std::vector<std::size_t> &events);

// Pointwise mean and sample standard deviation across included cycles.
CycleStats cycle_stats(const GaitSegmentation &seg);

struct PhaseOptions {
  double activation_frac = 0.2; // of the channel's |mean| cycle range
  double force_frac = 0.05;     // stance gate on the GRF cycle
};

// Stance phases from the order in which channels activate. grf_cycle fills
// gaps: bins without sensor activation count as stance only while the
// average force is above force_frac of its max.
PhaseTimeline classify_phases(const std::array<CycleStats, 4> &sensor_cycles,
                              const CycleStats &grf_cycle,
                              const PhaseOptions &opt = {});

} // namespace insole
