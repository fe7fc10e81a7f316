#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"
#include "dataio.hpp"
#include "model.hpp"
#include "series.hpp"

namespace insole {

// Parametric gait template. The vertical shape is two raised-cosine bumps
// with a mid-stance valley; amplitude defaults to the impulse-consistent
// value (integral of vertical force over one cycle == body_weight_n *
// cycle_s). An explicit fv_peak_n overrides that and breaks impulse
// consistency.
struct GaitProfile {
  double speed_mps = 1.0;
  double cycle_s = 1.1;
  double duty = 0.62;           // stance fraction
  double fv_peak_n = 0.0;       // 0 -> derived from body_weight_n
  double fv_trough_frac = 0.75; // valley level relative to the peaks
  double ml_peak_n = 25.0;
  double body_weight_n = 700.0;
  // Load window per channel in percent of cycle, ordered HL<=MF<=MT<=TO on
  // both edges.
  std::array<double, 4> onset_pct{0.0, 8.0, 16.0, 24.0};
  std::array<double, 4> release_pct{40.0, 48.0, 55.0, 62.0};
  std::array<double, 4> share{0.40, 0.15, 0.25, 0.20};
  double jitter_period = 0.02;  // +-2% stride-to-stride period jitter
  double jitter_amplitude = 0.03;

  void validate() const;
  // Stride period scales linearly from cycle_s at 1 m/s down to ~0.9x at
  // 2 m/s.
  double cycle_at_speed(double speed) const;
  double peak_n() const; // fv_peak_n or the impulse-consistent default
};

// Static resistance law with lag, optional backlash hysteresis and noise,
// all per channel: R = r0 (1 - a F / (F + f_half)), then first-order lag,
// then noise.
struct SensorLaw {
  std::array<double, 4> r0{900.0, 1100.0, 1000.0, 800.0};
  std::array<double, 4> sensitivity{0.8, 0.8, 0.8, 0.8}; // a, in (0, 1)
  std::array<double, 4> f_half_n{120.0, 80.0, 100.0, 90.0};
  std::array<double, 4> lag_tau_s{0.03, 0.03, 0.03, 0.03};
  std::array<double, 4> hysteresis_width_n{0, 0, 0, 0}; // play width on force
  std::array<double, 4> noise_sigma_ohm{0, 0, 0, 0};

  void validate() const;
  double static_resistance(int channel, double force_n) const;
  double static_delta_pct(int channel, double force_n) const;
};

struct SynthGrf {
  GrfRecording grf;
  std::vector<double> event_times_s;              // true heel strikes
  std::array<std::vector<double>, 4> channel_force; // per-sensor load share
};

SynthGrf synth_grf(const GaitProfile &profile, double duration_s, double rate_hz,
                   std::uint64_t seed, Side side = Side::Left);

// Passes the per-channel forces through the sensor law; the result is in
// ohms, convertible to divider volts for CSV emission.
InsoleRecording synth_sensor(const SynthGrf &truth, const SensorLaw &law,
                             double rate_hz, std::uint64_t seed);

// Random stable truth model for identification oracle tests: monotone
// nonlinearities, stable LTI block, normalized convention applied.
HwModel make_truth_hw(std::size_t breakpoints, std::uint64_t seed);

struct SynthTrial {
  Trial trial;
  std::vector<double> event_times_s;
  std::array<std::vector<double>, 4> channel_force;
  InsoleRecording raw_ohms; // pre-conversion sensor signals
};

// One conditioned trial (sensor law -> ohms -> percent versus the trial's
// own standing baseline) plus its ground truth.
SynthTrial synth_trial(const GaitProfile &profile, const SensorLaw &law,
                       double duration_s, double rate_hz, std::uint64_t seed,
                       Side side);

struct SynthDataset {
  std::vector<SynthTrial> trials; // trial-major, left then right per trial
  std::vector<double> speeds;
  std::size_t trial_count = 0;
};

// Protocol mirror: each walking trial holds every speed back to back
// (~per_speed_s each); the first trial is identification, the rest are
// validation. Generates left and right sides.
SynthDataset synth_dataset(const GaitProfile &profile, const SensorLaw &law,
                           const std::vector<double> &speeds, std::size_t trial_count,
                           double per_speed_s, double rate_hz, std::uint64_t seed);

// Oracle-mode trial: GRF components REPLACED by the outputs of truth HW
// models driven by the synthetic resistance changes, with optional
// multiplicative noise. Used by identification recovery tests.
struct OracleTruth {
  HwModel vertical;
  HwModel mediolateral;
};

SynthTrial synth_oracle_trial(const GaitProfile &profile, const SensorLaw &law,
                              const OracleTruth &truth, double duration_s,
                              double rate_hz, std::uint64_t seed, Side side,
                              double noise_frac);

// Profile/law construction from config (sim.* keys).
GaitProfile profile_from_config(const Config &cfg);
SensorLaw law_from_config(const Config &cfg);

} // namespace insole
