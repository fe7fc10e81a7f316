#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"
#include "ident.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "sim.hpp"
#include "svg.hpp"

namespace insole {

namespace fs = std::filesystem;
using nlohmann::json;

RunOptions RunOptions::from_config(const Config &cfg) {
  RunOptions run;
  run.seed = cfg.get_u64("run.seed", 0);
  run.jobs = static_cast<int>(cfg.get_int("run.jobs", 1));
  run.deterministic = cfg.get_bool("run.deterministic", false);
  require(run.jobs >= 1, Fault::InvalidArgument, "run.jobs must be >= 1");
  return run;
}

namespace {

std::string hex64(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Manifest {
public:
  Manifest(std::string command, const Config &cfg, const RunOptions &run)
      : command_(std::move(command)), run_(run) {
    for (const auto &[k, v] : cfg.entries())
      config_[k] = v;
  }

  void add_input(const std::string &path) { inputs_[path] = hex64(hash_file(path)); }
  void add_output(const std::string &name) { outputs_.push_back(name); }

  void write(const fs::path &out_dir) const {
    json j;
    j["tool"] = "insole";
    j["version"] = kToolVersion;
    j["command"] = command_;
    j["seed"] = run_.seed;
    j["jobs"] = run_.jobs;
    j["deterministic"] = run_.deterministic;
    j["config"] = config_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    if (!run_.deterministic)
      j["created_utc"] = timestamp_utc();
    std::ofstream out(out_dir / "manifest.json");
    require(out.good(), Fault::IoError, "cannot write manifest.json");
    out << j.dump(2) << "\n";
  }

private:
  std::string command_;
  RunOptions run_;
  std::map<std::string, std::string> config_;
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
};

fs::path ensure_out_dir(const std::string &out_dir) {
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), Fault::IoError,
          "cannot create output directory: " + out_dir);
  return dir;
}

std::vector<double> parse_speed_list(const std::string &text) {
  std::vector<double> speeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    speeds.push_back(std::stod(item));
  require(!speeds.empty(), Fault::SchemaError, "sim.speeds is empty");
  return speeds;
}

Component component_from_string(const std::string &s) {
  if (s == "vertical")
    return Component::Vertical;
  if (s == "mediolateral")
    return Component::Mediolateral;
  raise(Fault::SchemaError, "unknown GRF component: " + s);
}

std::vector<double> time_axis(std::size_t n, double rate_hz) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = static_cast<double>(i) / rate_hz;
  return t;
}

void decimate(std::vector<double> &xs, std::vector<double> &ys, std::size_t cap) {
  if (xs.size() <= cap)
    return;
  const std::size_t stride = (xs.size() + cap - 1) / cap;
  std::size_t out = 0;
  for (std::size_t i = 0; i < xs.size(); i += stride) {
    xs[out] = xs[i];
    ys[out] = ys[i];
    ++out;
  }
  xs.resize(out);
  ys.resize(out);
}

const char *kChannelColors[4] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};

} // namespace

FitReport evaluate_full(const Model &model, const Trial &trial,
                        Component component, bool warmup_excluded) {
  const std::vector<double> est = model_simulate(model, trial.delta_r());
  const std::size_t warmup = warmup_excluded ? model_warmup(model) : 0;
  const std::vector<double> &measured = trial.grf_component(component);

  std::vector<double> measured_avg, est_avg;
  try {
    const auto events = detect_heel_strikes(trial.grf.vertical);
    const ChannelSeries est_series(est, trial.rate_hz(), Unit::Newtons);
    const ChannelSeries meas_series(measured, trial.rate_hz(), Unit::Newtons);
    const CycleStats m_stats = cycle_stats(segment_cycles(meas_series, events));
    const CycleStats e_stats = cycle_stats(segment_cycles(est_series, events));
    measured_avg.assign(m_stats.mean.begin(), m_stats.mean.end());
    est_avg.assign(e_stats.mean.begin(), e_stats.mean.end());
  } catch (const PipelineError &) {
    // No usable gait cycles (oracle datasets, degenerate signals): series
    // metrics still apply, cycle metrics stay NaN.
  }
  return full_report(measured, est, warmup, measured_avg, est_avg);
}

// --- simulate ---------------------------------------------------------------

namespace {

void emit_trial_files(const SynthTrial &st, std::size_t trial_no,
                      const AdcConfig &adc, double rate_hz, double speed,
                      const fs::path &dir, Manifest &manifest) {
  const std::string side = to_string(st.trial.insole.side);
  const std::string stem = "trial" + std::to_string(trial_no) + "_" + side;
  const std::size_t n = st.trial.size();
  const std::vector<double> t = time_axis(n, rate_hz);

  {
    CsvWriter csv((dir / (stem + "_insole.csv")).string());
    csv.write_header({"t", "hl", "mf", "mt", "to"});
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row{t[i]};
      for (int c = 0; c < kNumChannels; ++c)
        row.push_back(divider_voltage(st.raw_ohms.channels[c].values[i], adc));
      csv.write_row(row);
    }
    manifest.add_output(stem + "_insole.csv");
  }
  {
    CsvWriter csv((dir / (stem + "_grf.csv")).string());
    csv.write_header({"t", "fv", "fml"});
    for (std::size_t i = 0; i < n; ++i)
      csv.write_row({t[i], st.trial.grf.vertical.values[i],
                     st.trial.grf.mediolateral.values[i]});
    manifest.add_output(stem + "_grf.csv");
  }
  {
    std::ofstream meta(dir / (stem + ".meta"));
    require(meta.good(), Fault::IoError, "cannot write trial meta file");
    meta << "insole_csv = " << stem << "_insole.csv\n";
    meta << "grf_csv = " << stem << "_grf.csv\n";
    meta << "side = " << side << "\n";
    meta << "speed_mps = " << format_double(speed) << "\n";
    meta << "role = " << to_string(st.trial.role) << "\n";
    meta << "insole.unit = volts\n";
    meta << "adc.v_in = " << format_double(adc.v_in) << "\n";
    meta << "adc.r_bias = " << format_double(adc.r_bias) << "\n";
    meta << "adc.bits = " << adc.bits << "\n";
    meta << "r0.window_s = 1\n";
    meta << "sync.target_hz = " << format_double(rate_hz) << "\n";
    meta << "sync.offset_s = 0\n";
    manifest.add_output(stem + ".meta");
  }
  {
    json truth;
    truth["event_times_s"] = st.event_times_s;
    json forces;
    for (int c = 0; c < kNumChannels; ++c)
      forces[to_string(kChannels[c])] = st.channel_force[c];
    truth["channel_force_n"] = forces;
    json r0;
    for (int c = 0; c < kNumChannels; ++c)
      r0[to_string(kChannels[c])] = st.trial.r0[c];
    truth["baseline_r0_ohm"] = r0;
    std::ofstream out(dir / ("truth_" + stem + ".json"));
    require(out.good(), Fault::IoError, "cannot write truth sidecar");
    out << truth.dump() << "\n";
    manifest.add_output("truth_" + stem + ".json");
  }
}

} // namespace

void cmd_simulate(const Config &cfg, const std::string &out_dir) {
  const RunOptions run = RunOptions::from_config(cfg);
  const fs::path dir = ensure_out_dir(out_dir);
  Manifest manifest("simulate", cfg, run);

  const double rate_hz = cfg.get_double("sim.rate_hz", 100.0);
  const GaitProfile profile = profile_from_config(cfg);
  const SensorLaw law = law_from_config(cfg);
  AdcConfig adc;
  adc.v_in = cfg.get_double("adc.v_in", 5.0);
  adc.r_bias = cfg.get_double("adc.r_bias", 560.0);
  adc.bits = static_cast<int>(cfg.get_int("adc.bits", 16));
  adc.validate();

  const std::string mode = cfg.get_string("sim.mode", "physical");
  if (mode == "physical") {
    const auto speeds = parse_speed_list(cfg.get_string("sim.speeds", "1,1.5,2"));
    const auto trial_count =
        static_cast<std::size_t>(cfg.get_int("sim.trials", 3));
    const double per_speed_s = cfg.get_double("sim.per_speed_s", 40.0);
    const SynthDataset dataset = synth_dataset(profile, law, speeds, trial_count,
                                               per_speed_s, rate_hz, run.seed);
    for (std::size_t i = 0; i < dataset.trials.size(); ++i)
      emit_trial_files(dataset.trials[i], i / 2 + 1, adc, rate_hz,
                       speeds.front(), dir, manifest);
  } else if (mode == "oracle") {
    const auto k = static_cast<std::size_t>(cfg.get_int("sim.oracle.k", 6));
    const double noise = cfg.get_double("sim.oracle.noise_frac", 0.0);
    const double duration = cfg.get_double("sim.duration_s", 120.0);
    const auto trial_count =
        static_cast<std::size_t>(cfg.get_int("sim.trials", 3));
    OracleTruth truth{make_truth_hw(k, Rng::derive(run.seed, 101)),
                      make_truth_hw(k, Rng::derive(run.seed, 102))};
    save_model(Model(truth.vertical), (dir / "truth_model_vertical.json").string());
    save_model(Model(truth.mediolateral),
               (dir / "truth_model_mediolateral.json").string());
    manifest.add_output("truth_model_vertical.json");
    manifest.add_output("truth_model_mediolateral.json");
    for (std::size_t trial_no = 1; trial_no <= trial_count; ++trial_no) {
      for (Side side : {Side::Left, Side::Right}) {
        SynthTrial st = synth_oracle_trial(
            profile, law, truth, duration, rate_hz,
            Rng::derive(run.seed, 200 + trial_no, side == Side::Left ? 0 : 1),
            side, noise);
        st.trial.role = trial_no == 1 ? Role::Identification : Role::Validation;
        emit_trial_files(st, trial_no, adc, rate_hz, profile.speed_mps, dir,
                         manifest);
      }
    }
  } else {
    raise(Fault::SchemaError, "sim.mode must be physical or oracle");
  }
  manifest.write(dir);
}

// --- ident ------------------------------------------------------------------

void cmd_ident(const std::vector<std::string> &meta_paths, const Config &cfg,
               const std::string &out_dir) {
  require(!meta_paths.empty(), Fault::InvalidArgument,
          "ident needs at least one trial meta file");
  const RunOptions run = RunOptions::from_config(cfg);
  IdentConfig icfg = IdentConfig::from_config(cfg);
  icfg.jobs = run.jobs;

  struct Loaded {
    Trial trial;
    std::string label;
  };
  std::vector<Loaded> loaded;
  for (const auto &path : meta_paths)
    loaded.push_back({parse_trial(path, &cfg), fs::path(path).stem().string()});

  const fs::path dir = ensure_out_dir(out_dir);
  Manifest manifest("ident", cfg, run);
  for (const auto &path : meta_paths)
    manifest.add_input(path);

  std::vector<FitRow> fit_rows;
  CsvWriter candidates_csv((dir / "candidates.csv").string());
  candidates_csv.write_header({"side", "component", "model", "breakpoints",
                               "order", "start", "param_count", "cost",
                               "fit_ident_pct", "fit_valid_mean_pct",
                               "selected"});

  bool any_side = false;
  for (Side side : {Side::Left, Side::Right}) {
    std::vector<const Loaded *> ident_in, valid_in;
    for (const auto &l : loaded) {
      if (l.trial.insole.side != side)
        continue;
      (l.trial.role == Role::Identification ? ident_in : valid_in).push_back(&l);
    }
    if (ident_in.empty() && valid_in.empty())
      continue;
    any_side = true;
    require(!ident_in.empty(), Fault::InvalidArgument,
            std::string("no identification trial for side ") + to_string(side));
    require(!valid_in.empty(), Fault::InvalidArgument,
            std::string("no validation trial for side ") + to_string(side));

    std::vector<Trial> ident_trials;
    for (const auto *l : ident_in)
      ident_trials.push_back(l->trial);
    const Trial ident_trial = concat_trials(ident_trials);
    std::vector<const Trial *> valid_ptrs;
    for (const auto *l : valid_in)
      valid_ptrs.push_back(&l->trial);

    for (Component component : {Component::Vertical, Component::Mediolateral}) {
      IdentResult result = grid_search(ident_trial, valid_ptrs, component, icfg);

      const std::string stem = std::string("model_") + to_string(side) + "_" +
                               to_string(component);
      save_model(result.model, (dir / (stem + ".json")).string());
      manifest.add_output(stem + ".json");

      // The best linear candidate rides along for side-by-side comparison.
      std::ptrdiff_t linear_idx = -1;
      for (std::size_t i = 0; i < result.candidates.size(); ++i)
        if (result.candidates[i].k == 0 &&
            (linear_idx < 0 ||
             result.candidates[i].fit_valid_mean >
                 result.candidates[static_cast<std::size_t>(linear_idx)]
                     .fit_valid_mean))
          linear_idx = static_cast<std::ptrdiff_t>(i);
      if (linear_idx >= 0) {
        save_model(result.candidate_models[static_cast<std::size_t>(linear_idx)],
                   (dir / (stem + "_linear.json")).string());
        manifest.add_output(stem + "_linear.json");
      }

      const bool selected_is_hw = result.chosen_k > 0;
      auto emit_rows = [&](const Model &m, const std::string &kind,
                           bool selected) {
        FitRow row;
        row.side = to_string(side);
        row.component = to_string(component);
        row.model = kind;
        row.breakpoints = model_meta(m).breakpoints;
        row.selected = selected;
        row.role = "identification";
        row.dataset = "ident";
        row.report = evaluate_full(m, ident_trial, component);
        fit_rows.push_back(row);
        for (const auto *l : valid_in) {
          row.role = "validation";
          row.dataset = l->label;
          row.report = evaluate_full(m, l->trial, component);
          fit_rows.push_back(row);
        }
      };
      emit_rows(result.model, selected_is_hw ? "hw" : "linear", true);
      if (linear_idx >= 0 && selected_is_hw)
        emit_rows(result.candidate_models[static_cast<std::size_t>(linear_idx)],
                  "linear", false);

      for (std::size_t i = 0; i < result.candidates.size(); ++i) {
        const CandidateFit &c = result.candidates[i];
        const bool is_winner = c.k == result.chosen_k && c.cost == result.cost;
        candidates_csv.write_cells(
            {to_string(side), to_string(component), c.k == 0 ? "linear" : "hw",
             std::to_string(c.k), std::to_string(c.order),
             std::to_string(c.start), std::to_string(c.param_count),
             format_double(c.cost), format_double(c.fit_ident),
             format_double(c.fit_valid_mean), is_winner ? "1" : "0"});
      }
    }
  }
  require(any_side, Fault::InvalidArgument, "no trials matched either side");
  manifest.add_output("candidates.csv");

  write_fit_report_csv((dir / "fit_report.csv").string(), fit_rows);
  manifest.add_output("fit_report.csv");
  manifest.write(dir);
}

// --- validate ---------------------------------------------------------------

void cmd_validate(const std::vector<std::string> &model_paths,
                  const std::vector<std::string> &meta_paths, const Config &cfg,
                  const std::string &out_dir) {
  require(!model_paths.empty(), Fault::InvalidArgument, "validate needs a model");
  require(!meta_paths.empty(), Fault::InvalidArgument, "validate needs trials");
  const RunOptions run = RunOptions::from_config(cfg);

  std::vector<std::pair<Model, std::string>> models;
  for (const auto &path : model_paths)
    models.emplace_back(load_model(path), fs::path(path).stem().string());
  std::vector<std::pair<Trial, std::string>> trials;
  for (const auto &path : meta_paths)
    trials.emplace_back(parse_trial(path, &cfg), fs::path(path).stem().string());

  const fs::path dir = ensure_out_dir(out_dir);
  Manifest manifest("validate", cfg, run);
  for (const auto &path : model_paths)
    manifest.add_input(path);
  for (const auto &path : meta_paths)
    manifest.add_input(path);

  std::vector<FitRow> fit_rows;
  for (const auto &[model, model_label] : models) {
    const IdentMeta &meta = model_meta(model);
    const Component component = component_from_string(
        meta.component.empty() ? "vertical" : meta.component);
    for (const auto &[trial, trial_label] : trials) {
      if (!meta.side.empty() && meta.side != to_string(trial.insole.side))
        continue;

      FitRow row;
      row.side = to_string(trial.insole.side);
      row.component = to_string(component);
      row.model = std::holds_alternative<HwModel>(model) ? "hw" : "linear";
      row.breakpoints = meta.breakpoints;
      row.selected = true;
      row.role = to_string(trial.role);
      row.dataset = trial_label;
      row.report = evaluate_full(model, trial, component);
      fit_rows.push_back(row);

      const std::vector<double> est = model_simulate(model, trial.delta_r());
      std::vector<double> t = time_axis(trial.size(), trial.rate_hz());
      std::vector<double> t2 = t;
      std::vector<double> measured = trial.grf_component(component);
      std::vector<double> estimated = est;
      decimate(t, measured, 4000);
      decimate(t2, estimated, 4000);

      SvgFigure fig(860, 300);
      auto &panel = fig.add_panel();
      panel.set_title("Measured vs estimated GRF (" + row.component + ", " +
                      row.side + ", " + row.model + ")");
      panel.set_labels("time (s)", "force (N)");
      panel.polyline(t, measured, "#444444", 1.2, "force plate");
      panel.polyline(t2, estimated, "#d62728", 1.2, "model");
      const std::string svg_name =
          "validate_" + model_label + "_" + trial_label + ".svg";
      fig.save((dir / svg_name).string(), run.deterministic ? "" : timestamp_utc());
      manifest.add_output(svg_name);
    }
  }
  require(!fit_rows.empty(), Fault::InvalidArgument,
          "no model/trial pair matched on side");

  write_fit_report_csv((dir / "fit_report.csv").string(), fit_rows);
  manifest.add_output("fit_report.csv");
  manifest.write(dir);
}

// --- gait -------------------------------------------------------------------

void cmd_gait(const std::string &meta_path, const Config &cfg,
              const std::string &out_dir) {
  const RunOptions run = RunOptions::from_config(cfg);
  const Trial trial = parse_trial(meta_path, &cfg);

  HeelStrikeOptions hs;
  hs.threshold_frac = cfg.get_double("gait.threshold_frac", hs.threshold_frac);
  hs.min_cycle_s = cfg.get_double("gait.min_cycle_s", hs.min_cycle_s);
  PhaseOptions po;
  po.activation_frac = cfg.get_double("gait.activation_frac", po.activation_frac);

  const auto events = detect_heel_strikes(trial.grf.vertical, hs);

  struct Signal {
    std::string name;
    const ChannelSeries *series;
  };
  std::vector<Signal> signals{{"fv", &trial.grf.vertical},
                              {"fml", &trial.grf.mediolateral}};
  for (int c = 0; c < kNumChannels; ++c)
    signals.push_back({std::string("dr_") + to_string(kChannels[c]),
                       &trial.insole.channels[c]});

  const fs::path dir = ensure_out_dir(out_dir);
  Manifest manifest("gait", cfg, run);
  manifest.add_input(meta_path);

  std::map<std::string, CycleStats> stats;
  {
    CsvWriter stats_csv((dir / "stats.csv").string());
    stats_csv.write_header({"signal", "pct", "mean", "std"});
    CsvWriter excluded_csv((dir / "excluded_cycles.csv").string());
    excluded_csv.write_header({"signal", "cycle_index", "reason"});

    for (const auto &sig : signals) {
      const GaitSegmentation seg = segment_cycles(*sig.series, events);
      const CycleStats cs = cycle_stats(seg);
      stats[sig.name] = cs;
      const std::string cycles_name = "cycles_" + sig.name + ".csv";
      CsvWriter cycles_csv((dir / cycles_name).string());
      cycles_csv.write_header({"cycle_id", "pct", "value"});
      for (std::size_t ci = 0; ci < seg.cycles.size(); ++ci)
        for (std::size_t p = 0; p < kCyclePoints; ++p)
          cycles_csv.write_cells({std::to_string(ci), std::to_string(p),
                                  format_double(seg.cycles[ci][p])});
      manifest.add_output(cycles_name);
      for (std::size_t p = 0; p < kCyclePoints; ++p)
        stats_csv.write_cells({sig.name, std::to_string(p),
                               format_double(cs.mean[p]),
                               format_double(cs.std[p])});
      for (const auto &ex : seg.excluded_cycles)
        excluded_csv.write_cells({sig.name, std::to_string(ex.index), ex.reason});
    }
  }
  manifest.add_output("stats.csv");
  manifest.add_output("excluded_cycles.csv");

  const std::array<CycleStats, 4> sensor_stats{
      stats.at("dr_hl"), stats.at("dr_mf"), stats.at("dr_mt"), stats.at("dr_to")};
  const PhaseTimeline timeline = classify_phases(sensor_stats, stats.at("fv"), po);
  {
    CsvWriter phases_csv((dir / "phases.csv").string());
    phases_csv.write_header({"pct", "phase"});
    for (std::size_t p = 0; p < kCyclePoints; ++p)
      phases_csv.write_cells({std::to_string(p), to_string(timeline.labels[p])});
    manifest.add_output("phases.csv");
  }

  // Three panels mirroring the gait figure: vertical force, resistance
  // changes, phase bands.
  std::vector<double> pct(kCyclePoints);
  for (std::size_t p = 0; p < kCyclePoints; ++p)
    pct[p] = static_cast<double>(p);

  SvgFigure fig(860, 250);
  auto &fv_panel = fig.add_panel();
  fv_panel.set_title("Vertical GRF over the gait cycle");
  fv_panel.set_labels("gait cycle (%)", "force (N)");
  const CycleStats &fv_stats = stats.at("fv");
  fv_panel.error_bars(
      pct, std::vector<double>(fv_stats.mean.begin(), fv_stats.mean.end()),
      std::vector<double>(fv_stats.std.begin(), fv_stats.std.end()), "#444444",
      "mean +- std, n=" + std::to_string(fv_stats.n));

  auto &dr_panel = fig.add_panel();
  dr_panel.set_title("Resistance change over the gait cycle");
  dr_panel.set_labels("gait cycle (%)", "dR (%)");
  for (int c = 0; c < kNumChannels; ++c) {
    const CycleStats &cs = stats.at(std::string("dr_") + to_string(kChannels[c]));
    dr_panel.error_bars(pct, std::vector<double>(cs.mean.begin(), cs.mean.end()),
                        std::vector<double>(cs.std.begin(), cs.std.end()),
                        kChannelColors[c], to_string(kChannels[c]));
  }

  auto &phase_panel = fig.add_panel();
  phase_panel.set_title("Gait phase");
  phase_panel.set_labels("gait cycle (%)", "");
  const std::map<Phase, const char *> phase_colors{
      {Phase::HeelStrike, "#c6dbef"},
      {Phase::Loading, "#9ecae1"},
      {Phase::MidStance, "#6baed6"},
      {Phase::Terminal, "#3182bd"},
      {Phase::Swing, "#eeeeee"}};
  std::size_t span_start = 0;
  for (std::size_t p = 1; p <= kCyclePoints; ++p) {
    if (p == kCyclePoints || timeline.labels[p] != timeline.labels[span_start]) {
      const Phase ph = timeline.labels[span_start];
      phase_panel.vspan(static_cast<double>(span_start), static_cast<double>(p),
                        phase_colors.at(ph), to_string(ph));
      span_start = p;
    }
  }
  phase_panel.polyline({0.0, 100.0}, {0.0, 0.0}, "#ffffff", 0.1);

  fig.save((dir / "gait.svg").string(), run.deterministic ? "" : timestamp_utc());
  manifest.add_output("gait.svg");
  manifest.write(dir);
}

// --- report -----------------------------------------------------------------

void cmd_report(const std::vector<std::string> &run_dirs, const Config &cfg,
                const std::string &out_dir) {
  require(!run_dirs.empty(), Fault::InvalidArgument,
          "report needs at least one run directory");
  const RunOptions run = RunOptions::from_config(cfg);

  std::vector<std::pair<std::string, std::vector<FitRow>>> runs;
  for (const auto &rd : run_dirs) {
    const fs::path fit_csv = fs::path(rd) / "fit_report.csv";
    runs.emplace_back(fs::path(rd).filename().string(),
                      read_fit_report_csv(fit_csv.string()));
  }

  const fs::path dir = ensure_out_dir(out_dir);
  Manifest manifest("report", cfg, run);
  for (const auto &rd : run_dirs)
    manifest.add_input((fs::path(rd) / "fit_report.csv").string());

  write_report_csv((dir / "report.csv").string(), consolidate(runs));
  manifest.add_output("report.csv");
  manifest.write(dir);
}

} // namespace insole
