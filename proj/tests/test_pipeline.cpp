#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "csv.hpp"
#include "error.hpp"
#include "ident.hpp"
#include "pipeline.hpp"
#include "report.hpp"
#include "sim.hpp"

using namespace insole;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string &name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string sub(const std::string &name) const { return (path / name).string(); }
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small fast dataset: one speed block per trial, identification + one
// validation trial per side.
Config small_sim_config() {
  Config cfg;
  cfg.set("sim.speeds", "1");
  cfg.set("sim.trials", "2");
  cfg.set("sim.per_speed_s", "14");
  cfg.set("run.seed", "42");
  cfg.set("run.deterministic", "true");
  return cfg;
}

Config small_ident_config() {
  Config cfg = small_sim_config();
  cfg.set("ident.breakpoints", "5,6");
  cfg.set("ident.multistarts", "2");
  cfg.set("ident.max_iters", "60");
  cfg.set("run.jobs", "2");
  return cfg;
}

} // namespace

TEST_CASE("config files parse, merge and snapshot deterministically") {
  TempDir dir("insole_cfg_test");
  {
    std::ofstream out(dir.sub("a.cfg"));
    out << "# comment\n"
        << "adc.v_in = 5\n"
        << "sync.target_hz = 100   # trailing comment\n"
        << "side=left\n";
  }
  Config cfg = Config::from_file(dir.sub("a.cfg"));
  CHECK(cfg.get_double("adc.v_in", 0.0) == 5.0);
  CHECK(cfg.get_double("sync.target_hz", 0.0) == 100.0);
  CHECK(cfg.get_string("side", "") == "left");

  Config other;
  other.set("adc.v_in", "3.3");
  cfg.merge(other);
  CHECK(cfg.get_double("adc.v_in", 0.0) == 3.3);

  CHECK(cfg.snapshot() == "adc.v_in = 3.3\nside = left\nsync.target_hz = 100\n");

  SUBCASE("malformed values raise schema errors") {
    cfg.set("adc.bits", "not-a-number");
    CHECK_THROWS_AS(cfg.get_int("adc.bits", 0), PipelineError);
    CHECK_THROWS_AS(cfg.get_bool("side", false), PipelineError);
  }
}

TEST_CASE("simulate emits a parseable, conditioned dataset") {
  TempDir dir("insole_sim_cmd_test");
  cmd_simulate(small_sim_config(), dir.str());

  for (const char *name :
       {"trial1_left_insole.csv", "trial1_left_grf.csv", "trial1_left.meta",
        "truth_trial1_left.json", "trial2_right_insole.csv", "manifest.json"})
    CHECK(fs::exists(dir.path / name));

  const Trial trial = parse_trial(dir.sub("trial1_left.meta"));
  CHECK(trial.role == Role::Identification);
  CHECK(trial.insole.side == Side::Left);
  CHECK(trial.rate_hz() == 100.0);
  // Quiet lead-in: resistance change starts near zero.
  CHECK(std::abs(trial.insole.channels[0].values[10]) < 1.0);

  const Trial valid = parse_trial(dir.sub("trial2_left.meta"));
  CHECK(valid.role == Role::Validation);

  SUBCASE("deterministic reruns are byte-identical") {
    TempDir dir2("insole_sim_cmd_test2");
    cmd_simulate(small_sim_config(), dir2.str());
    for (const char *name : {"trial1_left_insole.csv", "trial1_left_grf.csv",
                             "trial1_left.meta", "manifest.json"})
      CHECK(slurp(dir.path / name) == slurp(dir2.path / name));
  }
}

TEST_CASE("gait command writes cycles, stats, phases and the figure") {
  TempDir data("insole_gait_cmd_data");
  cmd_simulate(small_sim_config(), data.str());

  TempDir out("insole_gait_cmd_out");
  Config cfg = small_sim_config();
  cmd_gait(data.sub("trial1_left.meta"), cfg, out.str());

  CHECK(fs::exists(out.path / "cycles_fv.csv"));
  CHECK(fs::exists(out.path / "cycles_dr_hl.csv"));
  CHECK(fs::exists(out.path / "stats.csv"));
  CHECK(fs::exists(out.path / "phases.csv"));
  CHECK(fs::exists(out.path / "excluded_cycles.csv"));
  CHECK(fs::exists(out.path / "gait.svg"));
  CHECK(fs::exists(out.path / "manifest.json"));

  // Six signals (fv, fml, four channels), 101 stat rows each.
  const std::string stats = slurp(out.path / "stats.csv");
  std::size_t lines = 0;
  for (char ch : stats)
    if (ch == '\n')
      ++lines;
  CHECK(lines == 1 + 6 * 101);

  const std::string svg = slurp(out.path / "gait.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("generated") == std::string::npos); // deterministic mode
}

TEST_CASE("ident, validate and report round-trip through the filesystem") {
  TempDir data("insole_ident_cmd_data");
  const Config cfg = small_ident_config();
  cmd_simulate(cfg, data.str());

  TempDir ident_out("insole_ident_cmd_out");
  const std::vector<std::string> metas{
      data.sub("trial1_left.meta"), data.sub("trial1_right.meta"),
      data.sub("trial2_left.meta"), data.sub("trial2_right.meta")};
  cmd_ident(metas, cfg, ident_out.str());

  for (const char *name :
       {"model_left_vertical.json", "model_left_mediolateral.json",
        "model_right_vertical.json", "model_right_mediolateral.json",
        "fit_report.csv", "candidates.csv", "manifest.json"})
    CHECK(fs::exists(ident_out.path / name));

  const auto rows = read_fit_report_csv(ident_out.sub("fit_report.csv"));
  std::size_t selected_validation = 0;
  for (const auto &row : rows) {
    if (row.selected && row.role == "validation")
      ++selected_validation;
    CHECK(row.report.nrmse_fit_pct > 0.0);
  }
  CHECK(selected_validation == 4); // 2 sides x 2 components x 1 validation trial

  SUBCASE("validate evaluates saved models against trials") {
    TempDir val_out("insole_validate_cmd_out");
    cmd_validate({ident_out.sub("model_left_vertical.json")},
                 {data.sub("trial2_left.meta")}, cfg, val_out.str());
    CHECK(fs::exists(val_out.path / "fit_report.csv"));
    bool saw_svg = false;
    for (const auto &entry : fs::directory_iterator(val_out.path))
      if (entry.path().extension() == ".svg")
        saw_svg = true;
    CHECK(saw_svg);

    const auto val_rows = read_fit_report_csv(val_out.sub("fit_report.csv"));
    REQUIRE(val_rows.size() == 1);
    CHECK(val_rows[0].side == "left");
    CHECK(val_rows[0].component == "vertical");
    CHECK(val_rows[0].report.nrmse_fit_pct > 50.0);
  }

  SUBCASE("report consolidates runs into the comparison table") {
    TempDir rep_out("insole_report_cmd_out");
    cmd_report({ident_out.str()}, cfg, rep_out.str());
    CHECK(fs::exists(rep_out.path / "report.csv"));
    const std::string table = slurp(rep_out.path / "report.csv");
    std::size_t lines = 0;
    for (char ch : table)
      if (ch == '\n')
        ++lines;
    CHECK(lines == 1 + 4); // header + runs x feet x components
    CHECK(table.find("vertical") != std::string::npos);
    CHECK(table.find("mediolateral") != std::string::npos);
  }
}

TEST_CASE("validate rejects malformed inputs without partial outputs") {
  TempDir data("insole_validate_bad_data");
  {
    std::ofstream bad(data.sub("bad.csv"));
    bad << "t,hl,mf\n0,1,2\n0.01,1,2\n";
  }
  {
    std::ofstream grf(data.sub("grf.csv"));
    grf << "t,fv,fml\n0,1,2\n0.01,1,2\n";
  }
  {
    std::ofstream meta(data.sub("bad.meta"));
    meta << "insole_csv = bad.csv\ngrf_csv = grf.csv\n";
  }
  // A real model file to pair with the bad trial.
  TempDir model_dir("insole_validate_bad_model");
  LinearModel lm;
  lm.g.num = {std::vector<double>{1.0}, {0.0}, {0.0}, {0.0}};
  lm.meta.side = "left";
  lm.meta.component = "vertical";
  save_model(Model(lm), model_dir.sub("m.json"));

  const fs::path out = fs::temp_directory_path() / "insole_validate_bad_out";
  fs::remove_all(out);
  Config cfg;
  CHECK_THROWS_AS(cmd_validate({model_dir.sub("m.json")}, {data.sub("bad.meta")},
                               cfg, out.string()),
                  PipelineError);
  CHECK_FALSE(fs::exists(out / "fit_report.csv"));
  fs::remove_all(out);
}

TEST_CASE("evaluate_full computes cycle metrics when cycles exist") {
  GaitProfile profile;
  SensorLaw law;
  const SynthTrial st = synth_trial(profile, law, 20.0, 100.0, 3, Side::Left);

  // A passthrough model cannot track force, but the report must still be
  // fully populated.
  LinearModel lm;
  lm.g.num = {std::vector<double>{-10.0}, {0.0}, {0.0}, {0.0}};
  lm.offset = 100.0;
  const FitReport report =
      evaluate_full(Model(lm), st.trial, Component::Vertical);
  CHECK(report.n_samples > 0);
  CHECK(std::isfinite(report.r_squared));
  CHECK(std::isfinite(report.rmse_abs_cycle));
  CHECK(report.rmse_abs > 0.0);
}

TEST_CASE("oracle simulate mode writes truth models") {
  TempDir dir("insole_oracle_cmd_test");
  Config cfg = small_sim_config();
  cfg.set("sim.mode", "oracle");
  cfg.set("sim.duration_s", "12");
  cfg.set("sim.oracle.k", "5");
  cmd_simulate(cfg, dir.str());
  CHECK(fs::exists(dir.path / "truth_model_vertical.json"));
  CHECK(fs::exists(dir.path / "truth_model_mediolateral.json"));
  const Model truth = load_model(dir.sub("truth_model_vertical.json"));
  CHECK(std::holds_alternative<HwModel>(truth));
  CHECK(std::get<HwModel>(truth).meta.breakpoints == 5);

  const Trial trial = parse_trial(dir.sub("trial1_left.meta"));
  // Oracle outputs come straight from the truth model over the conditioned
  // channels (CSV round-trip keeps them close, not bit-equal).
  const auto expected = hw_simulate(std::get<HwModel>(truth), trial.delta_r());
  double worst = 0.0;
  for (std::size_t i = 200; i < expected.size(); ++i)
    worst = std::max(worst,
                     std::abs(expected[i] - trial.grf.vertical.values[i]));
  CHECK(worst < 1.0);
}
