#include "sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace insole {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Raised cosine bump centered at c with half-width w, peak 1.
double rc(double u, double c, double w) {
  const double d = std::abs(u - c);
  if (d >= w)
    return 0.0;
  return 0.5 * (1.0 + std::cos(kPi * d / w));
}

// Stance-normalized vertical shape: two bumps and a valley filler keeping
// the mid-stance level at trough_frac of the peaks.
double vertical_shape(double u, double trough_frac) {
  const double bumps = rc(u, 0.25, 0.32) + rc(u, 0.75, 0.32);
  const double mid_level = 2.0 * rc(0.5, 0.25, 0.32);
  const double fill = std::max(0.0, trough_frac - mid_level);
  return bumps + fill * rc(u, 0.5, 0.22);
}

// Peak-valley-peak mediolateral shape, peak magnitude 1.
double ml_shape(double u) {
  return rc(u, 0.18, 0.20) - 0.6 * rc(u, 0.5, 0.25) + rc(u, 0.82, 0.20);
}

double shape_integral(double trough_frac) {
  // Simpson quadrature of the stance shape; fixed resolution keeps the
  // derived amplitude deterministic.
  constexpr int n = 10000;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * vertical_shape(u, trough_frac);
  }
  return acc / (3.0 * n);
}

// Smooth 0->1->0 load window over [on, off] percent with raised-cosine
// edges.
double channel_window(double pct, double on, double off, double edge) {
  if (pct <= on || pct >= off)
    return 0.0;
  const double e = std::min(edge, 0.5 * (off - on));
  if (pct < on + e)
    return 0.5 * (1.0 - std::cos(kPi * (pct - on) / e));
  if (pct > off - e)
    return 0.5 * (1.0 - std::cos(kPi * (off - pct) / e));
  return 1.0;
}

} // namespace

void GaitProfile::validate() const {
  require(duty > 0.0 && duty < 1.0, Fault::InvalidArgument, "duty must be in (0, 1)");
  require(cycle_s > 0.0, Fault::InvalidArgument, "cycle_s must be > 0");
  require(body_weight_n > 0.0, Fault::InvalidArgument, "body_weight_n must be > 0");
  require(fv_trough_frac > 0.0 && fv_trough_frac <= 1.0, Fault::InvalidArgument,
          "fv_trough_frac must be in (0, 1]");
  for (int c = 0; c + 1 < kNumChannels; ++c) {
    require(onset_pct[c] <= onset_pct[c + 1], Fault::InvalidArgument,
            "channel onsets must be ordered HL<=MF<=MT<=TO");
    require(release_pct[c] <= release_pct[c + 1], Fault::InvalidArgument,
            "channel releases must be ordered HL<=MF<=MT<=TO");
  }
  for (int c = 0; c < kNumChannels; ++c)
    require(release_pct[c] > onset_pct[c], Fault::InvalidArgument,
            "channel release must come after onset");
}

double GaitProfile::cycle_at_speed(double speed) const {
  const double factor = std::max(0.5, 1.0 - 0.18 * (speed - 1.0));
  return cycle_s * factor;
}

double GaitProfile::peak_n() const {
  if (fv_peak_n > 0.0)
    return fv_peak_n;
  return body_weight_n / (duty * shape_integral(fv_trough_frac));
}

void SensorLaw::validate() const {
  for (int c = 0; c < kNumChannels; ++c) {
    require(r0[c] > 0.0, Fault::InvalidArgument, "sensor r0 must be > 0");
    require(f_half_n[c] > 0.0, Fault::InvalidArgument, "sensor f_half must be > 0");
    require(sensitivity[c] > 0.0 && sensitivity[c] < 1.0, Fault::InvalidArgument,
            "sensor sensitivity must be in (0, 1)");
  }
  for (int c = 0; c < kNumChannels; ++c) {
    require(lag_tau_s[c] >= 0.0, Fault::InvalidArgument, "lag_tau_s must be >= 0");
    require(hysteresis_width_n[c] >= 0.0, Fault::InvalidArgument,
            "hysteresis width must be >= 0");
    require(noise_sigma_ohm[c] >= 0.0, Fault::InvalidArgument,
            "noise sigma must be >= 0");
  }
}

double SensorLaw::static_resistance(int channel, double force_n) const {
  const double f = std::max(0.0, force_n);
  return r0[channel] *
         (1.0 - sensitivity[channel] * f / (f + f_half_n[channel]));
}

double SensorLaw::static_delta_pct(int channel, double force_n) const {
  const double f = std::max(0.0, force_n);
  return -100.0 * sensitivity[channel] * f / (f + f_half_n[channel]);
}

SynthGrf synth_grf(const GaitProfile &profile, double duration_s, double rate_hz,
                   std::uint64_t seed, Side side) {
  profile.validate();
  require(duration_s > 0.0 && rate_hz > 0.0, Fault::InvalidArgument,
          "duration and rate must be > 0");

  const auto n = static_cast<std::size_t>(duration_s * rate_hz);
  const double peak = profile.peak_n();
  const double cycle = profile.cycle_at_speed(profile.speed_mps);

  // Stride schedule with seeded period/amplitude jitter. Kept in sample
  // units so that integer-sample periods give bit-identical cycles.
  Rng rng(Rng::derive(seed, 1));
  struct Stride {
    double start_sample, period_samples, amp;
  };
  std::vector<Stride> strides;
  double start = 0.0;
  while (start < static_cast<double>(n)) {
    Stride s;
    s.start_sample = start;
    s.period_samples =
        cycle * rate_hz *
        (1.0 + rng.uniform(-profile.jitter_period, profile.jitter_period));
    s.amp = 1.0 + rng.uniform(-profile.jitter_amplitude, profile.jitter_amplitude);
    strides.push_back(s);
    start += s.period_samples;
  }

  SynthGrf out;
  out.grf.side = side;
  std::vector<double> fv(n, 0.0), fml(n, 0.0);
  for (int c = 0; c < kNumChannels; ++c)
    out.channel_force[c].assign(n, 0.0);

  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double si = static_cast<double>(i);
    while (k + 1 < strides.size() && strides[k + 1].start_sample <= si)
      ++k;
    const Stride &s = strides[k];
    const double phase = (si - s.start_sample) / s.period_samples;
    const double stance = profile.duty;
    if (phase < stance) {
      const double u = phase / stance;
      const double f = peak * s.amp * vertical_shape(u, profile.fv_trough_frac);
      fv[i] = f;
      fml[i] = profile.ml_peak_n * s.amp * ml_shape(u);
      const double pct = 100.0 * phase;
      for (int c = 0; c < kNumChannels; ++c) {
        const double w = channel_window(pct, profile.onset_pct[c],
                                        profile.release_pct[c], 4.0);
        out.channel_force[c][i] = profile.share[c] * f * w;
      }
    }
  }
  for (const Stride &s : strides)
    if (s.start_sample < static_cast<double>(n))
      out.event_times_s.push_back(s.start_sample / rate_hz);

  out.grf.vertical = ChannelSeries(std::move(fv), rate_hz, Unit::Newtons);
  out.grf.mediolateral = ChannelSeries(std::move(fml), rate_hz, Unit::Newtons);
  return out;
}

InsoleRecording synth_sensor(const SynthGrf &truth, const SensorLaw &law,
                             double rate_hz, std::uint64_t seed) {
  law.validate();
  const std::size_t n = truth.grf.vertical.size();
  InsoleRecording rec;
  rec.side = truth.grf.side;

  const double dt = 1.0 / rate_hz;
  for (int c = 0; c < kNumChannels; ++c) {
    const double tau = law.lag_tau_s[c];
    const double alpha = tau > 0.0 ? 1.0 - std::exp(-dt / tau) : 1.0;
    Rng noise(Rng::derive(seed, 2, static_cast<std::uint64_t>(c)));
    std::vector<double> r(n);
    double play = 0.0;
    double lagged = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double f = truth.channel_force[c][i];
      if (law.hysteresis_width_n[c] > 0.0) {
        // Backlash: the effective force follows the input only once it
        // leaves the play band.
        const double w = law.hysteresis_width_n[c];
        play = std::max(f - w, std::min(f + w, i == 0 ? f : play));
        f = play;
      }
      const double r_static = law.static_resistance(c, f);
      lagged = i == 0 ? r_static : lagged + alpha * (r_static - lagged);
      double sample = lagged;
      if (law.noise_sigma_ohm[c] > 0.0)
        sample += noise.normal(0.0, law.noise_sigma_ohm[c]);
      r[i] = std::max(1.0, sample);
    }
    rec.channels[c] = ChannelSeries(std::move(r), rate_hz, Unit::Ohms);
  }
  return rec;
}

HwModel make_truth_hw(std::size_t breakpoints, std::uint64_t seed) {
  require(breakpoints >= 2, Fault::InvalidArgument, "need >= 2 breakpoints");
  Rng rng(Rng::derive(seed, 3));

  // Monotone input nonlinearities over the resistance-change range, gentle
  // random curvature.
  std::array<PwlFunction, 4> f1 = {
      PwlFunction::identity(-80.0, 5.0, breakpoints),
      PwlFunction::identity(-80.0, 5.0, breakpoints),
      PwlFunction::identity(-80.0, 5.0, breakpoints),
      PwlFunction::identity(-80.0, 5.0, breakpoints)};
  for (int c = 0; c < kNumChannels; ++c) {
    const auto &xs = f1[c].xs();
    std::vector<double> ys(breakpoints);
    ys[0] = xs[0];
    for (std::size_t j = 1; j < breakpoints; ++j) {
      const double slope = rng.uniform(0.5, 1.6);
      ys[j] = ys[j - 1] + slope * (xs[j] - xs[j - 1]);
    }
    f1[c].set_ys(std::move(ys));
  }

  LtiBlock g;
  const double radius = rng.uniform(0.35, 0.75);
  const double angle = rng.uniform(0.15, 1.2);
  // Conjugate pole pair: z^2 - 2 r cos(theta) z + r^2.
  g.den = {-2.0 * radius * std::cos(angle), radius * radius};
  for (int c = 0; c < kNumChannels; ++c) {
    const double gain = rng.uniform(0.4, 1.2);
    g.num[c] = {gain, gain * rng.uniform(-0.4, 0.4), gain * rng.uniform(-0.2, 0.2)};
    g.delay[c] = 0;
  }

  // Output nonlinearity: monotone map onto a force-like (mostly positive)
  // range.
  const double span = 360.0; // generous input span for the f2 grid
  std::vector<double> xs(breakpoints), ys(breakpoints);
  for (std::size_t j = 0; j < breakpoints; ++j)
    xs[j] = -span + 2.0 * span * static_cast<double>(j) /
                        static_cast<double>(breakpoints - 1);
  ys[0] = rng.uniform(-40.0, 10.0);
  for (std::size_t j = 1; j < breakpoints; ++j)
    ys[j] = ys[j - 1] + rng.uniform(0.6, 2.4) * (xs[j] - xs[j - 1]);
  HwModel model{f1, g, PwlFunction(std::move(xs), std::move(ys)), {}, {}};
  model.meta.breakpoints = breakpoints;
  model.meta.seed = seed;

  // Normalization convention over a deterministic sweep of the input range.
  std::array<std::vector<double>, 4> sweep;
  for (int c = 0; c < kNumChannels; ++c) {
    sweep[c].resize(512);
    for (std::size_t i = 0; i < sweep[c].size(); ++i) {
      const double u = static_cast<double>(i) / 511.0;
      sweep[c][i] = -80.0 + 85.0 * u;
    }
  }
  normalize_hw(model, sweep);
  return model;
}

SynthTrial synth_trial(const GaitProfile &profile, const SensorLaw &law,
                       double duration_s, double rate_hz, std::uint64_t seed,
                       Side side) {
  // One second of standing still in front, so the baseline window sees the
  // unloaded sensors exactly as the protocol prescribes.
  const double quiet_s = 1.0;
  const auto quiet_n = static_cast<std::size_t>(quiet_s * rate_hz);

  SynthGrf truth = synth_grf(profile, duration_s, rate_hz,
                             Rng::derive(seed, 4, side == Side::Left ? 0 : 1), side);
  auto prepend = [quiet_n](std::vector<double> &v) {
    v.insert(v.begin(), quiet_n, 0.0);
  };
  prepend(truth.grf.vertical.values);
  prepend(truth.grf.mediolateral.values);
  for (int c = 0; c < kNumChannels; ++c)
    prepend(truth.channel_force[c]);
  for (double &t : truth.event_times_s)
    t += quiet_s;

  InsoleRecording ohms = synth_sensor(
      truth, law, rate_hz, Rng::derive(seed, 5, side == Side::Left ? 0 : 1));

  SynthTrial out;
  out.event_times_s = truth.event_times_s;
  out.channel_force = truth.channel_force;
  out.raw_ohms = ohms;

  Trial &trial = out.trial;
  trial.insole.side = side;
  trial.grf = truth.grf;
  trial.speed_mps = profile.speed_mps;
  for (int c = 0; c < kNumChannels; ++c) {
    const double r0 = baseline_r0(ohms.channels[c], quiet_s);
    trial.r0[c] = r0;
    trial.insole.channels[c] = resistance_to_delta(ohms.channels[c], r0);
  }
  trial.validate();
  return out;
}

SynthDataset synth_dataset(const GaitProfile &profile, const SensorLaw &law,
                           const std::vector<double> &speeds, std::size_t trial_count,
                           double per_speed_s, double rate_hz, std::uint64_t seed) {
  require(!speeds.empty(), Fault::InvalidArgument, "need at least one speed");
  require(trial_count >= 1, Fault::InvalidArgument, "need at least one trial");

  SynthDataset dataset;
  dataset.speeds = speeds;
  dataset.trial_count = trial_count;

  for (std::size_t trial_idx = 0; trial_idx < trial_count; ++trial_idx) {
    for (Side side : {Side::Left, Side::Right}) {
      // All speeds back to back in one record, then conditioned once so the
      // whole walking trial shares a single standing baseline.
      SynthGrf combined;
      combined.grf.side = side;
      std::vector<double> fv, fml;
      std::array<std::vector<double>, 4> forces;
      const double quiet_s = 1.0;
      const auto quiet_n = static_cast<std::size_t>(quiet_s * rate_hz);
      fv.assign(quiet_n, 0.0);
      fml.assign(quiet_n, 0.0);
      for (int c = 0; c < kNumChannels; ++c)
        forces[c].assign(quiet_n, 0.0);

      for (std::size_t s = 0; s < speeds.size(); ++s) {
        GaitProfile p = profile;
        p.speed_mps = speeds[s];
        const std::uint64_t sub =
            Rng::derive(seed, 16 + trial_idx * 8 + (side == Side::Left ? 0 : 4), s);
        SynthGrf part = synth_grf(p, per_speed_s, rate_hz, sub, side);
        const double t_offset =
            static_cast<double>(fv.size()) / rate_hz;
        for (double t : part.event_times_s)
          combined.event_times_s.push_back(t + t_offset);
        fv.insert(fv.end(), part.grf.vertical.values.begin(),
                  part.grf.vertical.values.end());
        fml.insert(fml.end(), part.grf.mediolateral.values.begin(),
                   part.grf.mediolateral.values.end());
        for (int c = 0; c < kNumChannels; ++c)
          forces[c].insert(forces[c].end(), part.channel_force[c].begin(),
                           part.channel_force[c].end());
      }
      combined.grf.vertical = ChannelSeries(std::move(fv), rate_hz, Unit::Newtons);
      combined.grf.mediolateral = ChannelSeries(std::move(fml), rate_hz, Unit::Newtons);
      combined.channel_force = std::move(forces);

      InsoleRecording ohms = synth_sensor(
          combined, law, rate_hz,
          Rng::derive(seed, 64 + trial_idx * 2 + (side == Side::Left ? 0 : 1)));

      SynthTrial st;
      st.event_times_s = combined.event_times_s;
      st.channel_force = combined.channel_force;
      st.raw_ohms = ohms;
      st.trial.insole.side = side;
      st.trial.grf = combined.grf;
      st.trial.speed_mps = speeds.front();
      st.trial.role = trial_idx == 0 ? Role::Identification : Role::Validation;
      for (int c = 0; c < kNumChannels; ++c) {
        const double r0 = baseline_r0(ohms.channels[c], quiet_s);
        st.trial.r0[c] = r0;
        st.trial.insole.channels[c] = resistance_to_delta(ohms.channels[c], r0);
      }
      st.trial.validate();
      dataset.trials.push_back(std::move(st));
    }
  }
  return dataset;
}

SynthTrial synth_oracle_trial(const GaitProfile &profile, const SensorLaw &law,
                              const OracleTruth &truth, double duration_s,
                              double rate_hz, std::uint64_t seed, Side side,
                              double noise_frac) {
  SynthTrial st = synth_trial(profile, law, duration_s, rate_hz, seed, side);
  const auto dr = st.trial.delta_r();
  std::vector<double> fv = hw_simulate(truth.vertical, dr);
  std::vector<double> fml = hw_simulate(truth.mediolateral, dr);
  if (noise_frac > 0.0) {
    Rng rng(Rng::derive(seed, 6));
    for (double &x : fv)
      x *= 1.0 + noise_frac * rng.normal();
    for (double &x : fml)
      x *= 1.0 + noise_frac * rng.normal();
  }
  st.trial.grf.vertical.values = std::move(fv);
  st.trial.grf.mediolateral.values = std::move(fml);
  st.trial.validate();
  return st;
}

GaitProfile profile_from_config(const Config &cfg) {
  GaitProfile p;
  p.cycle_s = cfg.get_double("sim.cycle_s", p.cycle_s);
  p.duty = cfg.get_double("sim.duty", p.duty);
  p.fv_peak_n = cfg.get_double("sim.fv_peak_n", p.fv_peak_n);
  p.fv_trough_frac = cfg.get_double("sim.fv_trough_frac", p.fv_trough_frac);
  p.ml_peak_n = cfg.get_double("sim.ml_peak_n", p.ml_peak_n);
  p.body_weight_n = cfg.get_double("sim.body_weight_n", p.body_weight_n);
  p.jitter_period = cfg.get_double("sim.jitter_period", p.jitter_period);
  p.jitter_amplitude = cfg.get_double("sim.jitter_amplitude", p.jitter_amplitude);
  p.validate();
  return p;
}

SensorLaw law_from_config(const Config &cfg) {
  SensorLaw law;
  if (cfg.has("sim.sensitivity"))
    law.sensitivity.fill(cfg.get_double("sim.sensitivity", 0.8));
  if (cfg.has("sim.f_half_n"))
    law.f_half_n.fill(cfg.get_double("sim.f_half_n", 100.0));
  if (cfg.has("sim.lag_tau_s"))
    law.lag_tau_s.fill(cfg.get_double("sim.lag_tau_s", 0.03));
  if (cfg.has("sim.hysteresis_width_n"))
    law.hysteresis_width_n.fill(cfg.get_double("sim.hysteresis_width_n", 0.0));
  if (cfg.has("sim.noise_sigma_ohm"))
    law.noise_sigma_ohm.fill(cfg.get_double("sim.noise_sigma_ohm", 0.0));
  law.validate();
  return law;
}

} // namespace insole
