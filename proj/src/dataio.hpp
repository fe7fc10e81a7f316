#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "config.hpp"
#include "series.hpp"

namespace insole {

// Voltage divider / ADC front end: V_out = V_in R / (R_b + R).
struct AdcConfig {
  double v_in = 5.0;
  double r_bias = 560.0;
  int bits = 16;

  void validate() const;
};

struct InsoleRecording {
  std::array<ChannelSeries, 4> channels; // HL, MF, MT, TO
  Side side = Side::Left;

  std::size_t size() const { return channels[0].size(); }
  void validate() const;
};

struct GrfRecording {
  ChannelSeries vertical;
  ChannelSeries mediolateral;
  Side side = Side::Left;

  void validate() const;
};

// Conditioned, model-ready recording: four resistance-change channels
// (percent) synchronized with the two GRF components (newtons). Immutable
// after construction in practice; every operation takes it by const ref.
struct Trial {
  InsoleRecording insole;
  GrfRecording grf;
  double speed_mps = 0.0;
  Role role = Role::Identification;
  std::array<double, 4> r0{0, 0, 0, 0};

  std::size_t size() const { return insole.size(); }
  double rate_hz() const { return insole.channels[0].rate_hz; }
  std::array<std::vector<double>, 4> delta_r() const;
  const std::vector<double> &grf_component(Component c) const;
  void validate() const;
  // FNV-1a over the conditioned sample bit patterns; identifies the dataset
  // in model files and manifests.
  std::uint64_t content_hash() const;
};

// Eq-3 style conversions.
double divider_voltage(double resistance, const AdcConfig &cfg);
double resistance_from_voltage(double v_out, const AdcConfig &cfg);

// Per-sample conversion of a voltage series to resistance. Samples at or
// outside (0, v_in) are invalid: linearly interpolated from valid neighbors
// when they are <= max_invalid_frac of the series, an error otherwise.
ChannelSeries volts_to_resistance(const ChannelSeries &v_out, const AdcConfig &cfg,
                                  double max_invalid_frac = 0.01);

// Median resistance over the initial still-standing window.
double baseline_r0(const ChannelSeries &r, double window_s);

// Eq-1: percent change versus baseline.
ChannelSeries resistance_to_delta(const ChannelSeries &r, double r0);

// Timestamped raw columns straight out of a CSV (possibly non-uniform t).
struct RawSeries {
  std::vector<double> t;
  std::vector<double> values;
};

// Linear interpolation onto a uniform grid; exact passthrough when the grid
// hits source timestamps.
ChannelSeries interp_to_grid(const RawSeries &raw, double t_start, double rate_hz,
                             std::size_t n, Unit unit);

struct RawInsole {
  std::array<RawSeries, 4> channels;
  Side side = Side::Left;
  Unit unit = Unit::Volts;
};

struct RawGrf {
  RawSeries vertical;
  RawSeries mediolateral;
  Side side = Side::Left;
};

struct SyncOptions {
  double target_hz = 100.0;
  double offset_s = 0.0;       // added to insole timestamps
  double min_overlap_s = 5.0;
  bool auto_refine = false;    // cross-correlation refinement of offset_s
  double refine_range_s = 2.0;
};

// Interpolate both systems onto a shared uniform grid over their overlap.
// The insole side must already be conditioned to resistance change
// (percent); GRF is newtons.
Trial resample_sync(const RawInsole &insole_dr, const RawGrf &grf,
                    const SyncOptions &sync);

// Offset refinement: scans offsets within +-range for the maximum
// normalized cross-correlation between vertical GRF and the negated heel
// channel (they are strongly anticorrelated during gait).
double refine_offset(const RawInsole &insole_dr, const RawGrf &grf,
                     const SyncOptions &sync);

// Full ingest: meta file (key-value) names the two CSVs and the conversion
// parameters; returns the conditioned trial.
//
// Meta keys: insole_csv, grf_csv, side, speed_mps, role, insole.unit
// (volts|ohms), adc.v_in, adc.r_bias, adc.bits, r0.window_s,
// sync.target_hz, sync.offset_s, sync.auto_refine.
Trial parse_trial(const std::string &meta_path, const Config *overrides = nullptr);

// Reads insole/GRF CSVs given an explicit meta config (paths resolved
// against meta_dir when relative).
Trial parse_trial_csv(const Config &meta, const std::string &meta_dir);

// Identification runs on one record; multiple identification trials are
// joined back to back (shared rate required).
Trial concat_trials(const std::vector<Trial> &trials);

std::uint64_t fnv1a64(const void *data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t hash_file(const std::string &path);

} // namespace insole
