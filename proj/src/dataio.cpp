#include "dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "csv.hpp"
#include "error.hpp"

namespace insole {

void AdcConfig::validate() const {
  require(v_in > 0.0, Fault::InvalidArgument, "adc.v_in must be > 0");
  require(r_bias > 0.0, Fault::InvalidArgument, "adc.r_bias must be > 0");
  require(bits >= 8 && bits <= 32, Fault::InvalidArgument,
          "adc.bits must be in [8, 32]");
}

void InsoleRecording::validate() const {
  for (int c = 1; c < kNumChannels; ++c) {
    require(channels[c].size() == channels[0].size(), Fault::SchemaError,
            "insole channels differ in length");
    require(channels[c].rate_hz == channels[0].rate_hz, Fault::SchemaError,
            "insole channels differ in rate");
  }
  for (int c = 0; c < kNumChannels; ++c)
    channels[c].check_finite(std::string("insole channel ") + to_string(kChannels[c]));
}

void GrfRecording::validate() const {
  require(vertical.size() == mediolateral.size(), Fault::SchemaError,
          "GRF components differ in length");
  require(vertical.rate_hz == mediolateral.rate_hz, Fault::SchemaError,
          "GRF components differ in rate");
  require(vertical.unit == Unit::Newtons && mediolateral.unit == Unit::Newtons,
          Fault::UnitError, "GRF components must be newtons");
  vertical.check_finite("vertical GRF");
  mediolateral.check_finite("mediolateral GRF");
}

std::array<std::vector<double>, 4> Trial::delta_r() const {
  std::array<std::vector<double>, 4> out;
  for (int c = 0; c < kNumChannels; ++c)
    out[c] = insole.channels[c].values;
  return out;
}

const std::vector<double> &Trial::grf_component(Component c) const {
  return c == Component::Vertical ? grf.vertical.values : grf.mediolateral.values;
}

void Trial::validate() const {
  insole.validate();
  grf.validate();
  require(insole.size() == grf.vertical.size(), Fault::SchemaError,
          "insole and GRF lengths differ after sync");
  require(insole.channels[0].rate_hz == grf.vertical.rate_hz, Fault::SchemaError,
          "insole and GRF rates differ after sync");
  for (double r : r0)
    require(r > 0.0, Fault::NonPositiveBaseline, "baseline resistance must be > 0");
}

std::uint64_t Trial::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::vector<double> &v) {
    h = fnv1a64(v.data(), v.size() * sizeof(double), h);
  };
  for (int c = 0; c < kNumChannels; ++c)
    mix(insole.channels[c].values);
  mix(grf.vertical.values);
  mix(grf.mediolateral.values);
  const double rate = rate_hz();
  h = fnv1a64(&rate, sizeof rate, h);
  return h;
}

double divider_voltage(double resistance, const AdcConfig &cfg) {
  require(resistance > 0.0, Fault::InvalidArgument, "resistance must be > 0");
  return cfg.v_in * resistance / (cfg.r_bias + resistance);
}

double resistance_from_voltage(double v_out, const AdcConfig &cfg) {
  return cfg.r_bias / (cfg.v_in / v_out - 1.0);
}

ChannelSeries volts_to_resistance(const ChannelSeries &v_out, const AdcConfig &cfg,
                                  double max_invalid_frac) {
  cfg.validate();
  require(v_out.unit == Unit::Volts, Fault::UnitError,
          "volts_to_resistance expects a voltage series");
  const std::size_t n = v_out.size();
  require(n > 0, Fault::EmptyFile, "empty voltage series");

  std::vector<double> r(n);
  std::vector<bool> valid(n);
  std::size_t n_invalid = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = v_out.values[i];
    // V_out <= 0 means an open/shorted sample, V_out >= V_in a saturated one.
    if (std::isfinite(v) && v > 0.0 && v < cfg.v_in) {
      r[i] = resistance_from_voltage(v, cfg);
      valid[i] = true;
    } else {
      valid[i] = false;
      ++n_invalid;
    }
  }
  require(static_cast<double>(n_invalid) <= max_invalid_frac * static_cast<double>(n),
          Fault::TooManyInvalidSamples,
          std::to_string(n_invalid) + " of " + std::to_string(n) +
              " samples at or beyond the supply rails");
  require(n_invalid < n, Fault::TooManyInvalidSamples, "no valid samples");

  if (n_invalid > 0) {
    // Linear interpolation between the nearest valid neighbors; edge runs
    // take the nearest valid value.
    std::ptrdiff_t prev = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!valid[i])
        continue;
      if (prev < 0) {
        for (std::size_t j = 0; j < i; ++j)
          r[j] = r[i];
      } else if (static_cast<std::size_t>(prev) + 1 < i) {
        const double span = static_cast<double>(i) - static_cast<double>(prev);
        for (std::size_t j = static_cast<std::size_t>(prev) + 1; j < i; ++j) {
          const double t = (static_cast<double>(j) - static_cast<double>(prev)) / span;
          r[j] = (1.0 - t) * r[static_cast<std::size_t>(prev)] + t * r[i];
        }
      }
      prev = static_cast<std::ptrdiff_t>(i);
    }
    for (std::size_t j = static_cast<std::size_t>(prev) + 1; j < n; ++j)
      r[j] = r[static_cast<std::size_t>(prev)];
  }
  return ChannelSeries(std::move(r), v_out.rate_hz, Unit::Ohms, v_out.t0);
}

double baseline_r0(const ChannelSeries &r, double window_s) {
  require(window_s > 0.0, Fault::InvalidArgument, "baseline window must be > 0");
  require(window_s <= r.duration_s() + 1e-12, Fault::WindowTooLong,
          "baseline window exceeds series duration");
  std::size_t count = static_cast<std::size_t>(window_s * r.rate_hz);
  count = std::clamp<std::size_t>(count, 1, r.size());
  return median(std::vector<double>(r.values.begin(),
                                    r.values.begin() + static_cast<std::ptrdiff_t>(count)));
}

ChannelSeries resistance_to_delta(const ChannelSeries &r, double r0) {
  require(r0 > 0.0, Fault::NonPositiveBaseline, "baseline resistance must be > 0");
  require(r.unit == Unit::Ohms, Fault::UnitError,
          "resistance_to_delta expects a resistance series");
  std::vector<double> dr(r.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    dr[i] = (r.values[i] - r0) / r0 * 100.0;
  return ChannelSeries(std::move(dr), r.rate_hz, Unit::Percent, r.t0);
}

ChannelSeries interp_to_grid(const RawSeries &raw, double t_start, double rate_hz,
                             std::size_t n, Unit unit) {
  require(raw.t.size() == raw.values.size() && raw.t.size() >= 2,
          Fault::InvalidArgument, "raw series needs >= 2 timestamped samples");
  const std::size_t m = raw.t.size();

  // Piecewise cubic Lagrange on the four nearest source samples (linear or
  // quadratic near two/three-point series). Passes exactly through the
  // source samples, so resampling onto the source grid is the identity; the
  // cubic order keeps sub-noise error for gait-band signals where linear
  // interpolation would not.
  const std::size_t stencil = std::min<std::size_t>(4, m);
  const double snap = 1e-9 / rate_hz;
  std::vector<double> out(n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t_start + static_cast<double>(i) / rate_hz;
    while (k + 2 < m && raw.t[k + 1] <= t)
      ++k;
    if (std::abs(t - raw.t[k]) < snap) {
      out[i] = raw.values[k];
      continue;
    }
    if (std::abs(t - raw.t[k + 1]) < snap) {
      out[i] = raw.values[k + 1];
      continue;
    }
    const std::size_t s0 =
        std::min(m - stencil, k >= 1 ? k - 1 : std::size_t{0});
    double acc = 0.0;
    for (std::size_t j = 0; j < stencil; ++j) {
      double basis = 1.0;
      for (std::size_t l = 0; l < stencil; ++l)
        if (l != j)
          basis *= (t - raw.t[s0 + l]) / (raw.t[s0 + j] - raw.t[s0 + l]);
      acc += raw.values[s0 + j] * basis;
    }
    out[i] = acc;
  }
  return ChannelSeries(std::move(out), rate_hz, unit, t_start);
}

namespace {

struct Overlap {
  double t_start;
  std::size_t n;
};

Overlap shared_grid(const RawInsole &insole, const RawGrf &grf,
                    const SyncOptions &sync, double offset_s) {
  double in_begin = insole.channels[0].t.front() + offset_s;
  double in_end = insole.channels[0].t.back() + offset_s;
  for (int c = 1; c < kNumChannels; ++c) {
    in_begin = std::max(in_begin, insole.channels[c].t.front() + offset_s);
    in_end = std::min(in_end, insole.channels[c].t.back() + offset_s);
  }
  const double grf_begin = std::max(grf.vertical.t.front(), grf.mediolateral.t.front());
  const double grf_end = std::min(grf.vertical.t.back(), grf.mediolateral.t.back());
  const double t_start = std::max(in_begin, grf_begin);
  const double t_end = std::min(in_end, grf_end);
  require(t_end - t_start >= sync.min_overlap_s, Fault::InsufficientOverlap,
          "insole and GRF recordings overlap less than the required window");
  const auto n = static_cast<std::size_t>((t_end - t_start) * sync.target_hz) + 1;
  return {t_start, n};
}

RawSeries shifted(const RawSeries &raw, double offset_s) {
  RawSeries out = raw;
  for (double &t : out.t)
    t += offset_s;
  return out;
}

} // namespace

Trial resample_sync(const RawInsole &insole_dr, const RawGrf &grf,
                    const SyncOptions &sync) {
  require(sync.target_hz > 0.0, Fault::InvalidArgument, "sync.target_hz must be > 0");
  require(insole_dr.side == grf.side, Fault::SchemaError,
          "insole and GRF sides differ");
  require(insole_dr.unit == Unit::Percent, Fault::UnitError,
          "resample_sync expects conditioned resistance-change channels");

  double offset = sync.offset_s;
  if (sync.auto_refine)
    offset = refine_offset(insole_dr, grf, sync);

  const Overlap grid = shared_grid(insole_dr, grf, sync, offset);
  Trial trial;
  trial.insole.side = insole_dr.side;
  trial.grf.side = grf.side;
  for (int c = 0; c < kNumChannels; ++c)
    trial.insole.channels[c] =
        interp_to_grid(shifted(insole_dr.channels[c], offset), grid.t_start,
                       sync.target_hz, grid.n, Unit::Percent);
  trial.grf.vertical =
      interp_to_grid(grf.vertical, grid.t_start, sync.target_hz, grid.n, Unit::Newtons);
  trial.grf.mediolateral = interp_to_grid(grf.mediolateral, grid.t_start,
                                          sync.target_hz, grid.n, Unit::Newtons);
  return trial;
}

double refine_offset(const RawInsole &insole_dr, const RawGrf &grf,
                     const SyncOptions &sync) {
  // Coarse uniform grids, then maximize corr(fv, -heel) over the offset scan.
  const double dt = 1.0 / sync.target_hz;
  double best_offset = sync.offset_s;
  double best_score = -2.0;
  const int steps = static_cast<int>(sync.refine_range_s / dt);
  for (int s = -steps; s <= steps; ++s) {
    const double offset = sync.offset_s + static_cast<double>(s) * dt;
    SyncOptions local = sync;
    local.auto_refine = false;
    Overlap grid{};
    try {
      grid = shared_grid(insole_dr, grf, local, offset);
    } catch (const PipelineError &) {
      continue;
    }
    const ChannelSeries heel =
        interp_to_grid(shifted(insole_dr.channels[0], offset), grid.t_start,
                       sync.target_hz, grid.n, Unit::Percent);
    const ChannelSeries fv = interp_to_grid(grf.vertical, grid.t_start,
                                            sync.target_hz, grid.n, Unit::Newtons);
    const double mh = mean(heel.values), mf = mean(fv.values);
    double num = 0.0, dh = 0.0, df = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i) {
      const double a = -(heel.values[i] - mh);
      const double b = fv.values[i] - mf;
      num += a * b;
      dh += a * a;
      df += b * b;
    }
    if (dh <= 0.0 || df <= 0.0)
      continue;
    const double score = num / std::sqrt(dh * df);
    if (score > best_score) {
      best_score = score;
      best_offset = offset;
    }
  }
  require(best_score > -2.0, Fault::InsufficientOverlap,
          "offset refinement found no overlapping window");
  return best_offset;
}

namespace {

RawSeries column_as_raw(const CsvTable &table, const std::vector<double> &t,
                        const std::string &name) {
  RawSeries raw;
  raw.t = t;
  raw.values = table.columns[table.column(name)];
  return raw;
}

Side side_from_string(const std::string &s) {
  if (s == "left")
    return Side::Left;
  if (s == "right")
    return Side::Right;
  raise(Fault::SchemaError, "side must be left or right, got: " + s);
}

Role role_from_string(const std::string &s) {
  if (s == "identification")
    return Role::Identification;
  if (s == "validation")
    return Role::Validation;
  raise(Fault::SchemaError, "role must be identification or validation, got: " + s);
}

} // namespace

Trial parse_trial_csv(const Config &meta, const std::string &meta_dir) {
  namespace fs = std::filesystem;
  auto resolve = [&meta_dir](const std::string &p) {
    fs::path path(p);
    if (path.is_relative())
      path = fs::path(meta_dir) / path;
    return path.string();
  };

  const auto insole_csv = meta.get("insole_csv");
  const auto grf_csv = meta.get("grf_csv");
  require(insole_csv.has_value(), Fault::SchemaError, "meta missing insole_csv");
  require(grf_csv.has_value(), Fault::SchemaError, "meta missing grf_csv");

  const CsvTable insole_table =
      read_csv_expect(resolve(*insole_csv), {"t", "hl", "mf", "mt", "to"});
  const CsvTable grf_table = read_csv_expect(resolve(*grf_csv), {"t", "fv", "fml"});

  const std::vector<double> &t_in = insole_table.columns[0];
  const std::vector<double> &t_grf = grf_table.columns[0];
  for (std::size_t i = 1; i < t_in.size(); ++i)
    require(t_in[i] > t_in[i - 1], Fault::SchemaError,
            "insole timestamps must be strictly increasing");
  for (std::size_t i = 1; i < t_grf.size(); ++i)
    require(t_grf[i] > t_grf[i - 1], Fault::SchemaError,
            "GRF timestamps must be strictly increasing");

  AdcConfig adc;
  adc.v_in = meta.get_double("adc.v_in", 5.0);
  adc.r_bias = meta.get_double("adc.r_bias", 560.0);
  adc.bits = static_cast<int>(meta.get_int("adc.bits", 16));
  adc.validate();

  const std::string unit = meta.get_string("insole.unit", "volts");
  require(unit == "volts" || unit == "ohms", Fault::UnitError,
          "insole.unit must be volts or ohms");
  const double r0_window = meta.get_double("r0.window_s", 1.0);

  const Side side = side_from_string(meta.get_string("side", "left"));

  RawInsole raw_dr;
  raw_dr.side = side;
  raw_dr.unit = Unit::Percent;
  std::array<double, 4> r0{};
  for (int c = 0; c < kNumChannels; ++c) {
    RawSeries raw = column_as_raw(insole_table, t_in, to_string(kChannels[c]));
    require(raw.t.size() >= 2, Fault::SchemaError, "insole CSV needs >= 2 rows");
    // Condition on the file's own (near-uniform) grid before the shared
    // resample: volts -> ohms -> percent change.
    const double file_rate =
        static_cast<double>(raw.t.size() - 1) / (raw.t.back() - raw.t.front());
    ChannelSeries series(raw.values, file_rate,
                         unit == "volts" ? Unit::Volts : Unit::Ohms, raw.t.front());
    ChannelSeries ohms =
        unit == "volts" ? volts_to_resistance(series, adc) : std::move(series);
    r0[c] = baseline_r0(ohms, std::min(r0_window, ohms.duration_s()));
    ChannelSeries dr = resistance_to_delta(ohms, r0[c]);
    raw_dr.channels[c].t = raw.t;
    raw_dr.channels[c].values = std::move(dr.values);
  }

  RawGrf raw_grf;
  raw_grf.side = side;
  raw_grf.vertical = column_as_raw(grf_table, t_grf, "fv");
  raw_grf.mediolateral = column_as_raw(grf_table, t_grf, "fml");

  SyncOptions sync;
  sync.target_hz = meta.get_double("sync.target_hz", 100.0);
  sync.offset_s = meta.get_double("sync.offset_s", 0.0);
  sync.auto_refine = meta.get_bool("sync.auto_refine", false);

  Trial trial = resample_sync(raw_dr, raw_grf, sync);
  trial.speed_mps = meta.get_double("speed_mps", 0.0);
  trial.role = role_from_string(meta.get_string("role", "identification"));
  trial.r0 = r0;
  trial.validate();
  return trial;
}

Trial parse_trial(const std::string &meta_path, const Config *overrides) {
  Config meta = Config::from_file(meta_path);
  if (overrides)
    meta.merge(*overrides);
  return parse_trial_csv(meta, std::filesystem::path(meta_path).parent_path().string());
}

Trial concat_trials(const std::vector<Trial> &trials) {
  require(!trials.empty(), Fault::InvalidArgument, "no trials to concatenate");
  Trial out = trials.front();
  for (std::size_t i = 1; i < trials.size(); ++i) {
    const Trial &t = trials[i];
    require(t.rate_hz() == out.rate_hz(), Fault::SchemaError,
            "cannot concatenate trials with different rates");
    require(t.insole.side == out.insole.side, Fault::SchemaError,
            "cannot concatenate trials from different sides");
    for (int c = 0; c < kNumChannels; ++c)
      out.insole.channels[c].values.insert(out.insole.channels[c].values.end(),
                                           t.insole.channels[c].values.begin(),
                                           t.insole.channels[c].values.end());
    out.grf.vertical.values.insert(out.grf.vertical.values.end(),
                                   t.grf.vertical.values.begin(),
                                   t.grf.vertical.values.end());
    out.grf.mediolateral.values.insert(out.grf.mediolateral.values.end(),
                                       t.grf.mediolateral.values.begin(),
                                       t.grf.mediolateral.values.end());
  }
  return out;
}

std::uint64_t fnv1a64(const void *data, std::size_t size, std::uint64_t seed) {
  const auto *bytes = static_cast<const unsigned char *>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Fault::IoError, "cannot open file for hashing: " + path);
  char buf[1 << 14];
  std::uint64_t h = 0xcbf29ce484222325ULL;
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  return h;
}

} // namespace insole
