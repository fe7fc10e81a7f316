// insole: GRF estimation pipeline front end. Parses arguments, forwards to
// the shared library's C API and maps statuses onto process exit codes
// (0 ok, 2 input/schema, 3 numeric, 4 degenerate data).

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "insole/insole.h"

namespace {

struct ConfigHandle {
  insole_config *cfg = nullptr;
  ConfigHandle() { insole_config_create(&cfg); }
  ~ConfigHandle() { insole_config_free(cfg); }
  ConfigHandle(const ConfigHandle &) = delete;
  ConfigHandle &operator=(const ConfigHandle &) = delete;
};

std::vector<const char *> c_view(const std::vector<std::string> &items) {
  std::vector<const char *> out;
  out.reserve(items.size());
  for (const auto &s : items)
    out.push_back(s.c_str());
  return out;
}

int exit_code(insole_status status) {
  switch (status) {
  case INSOLE_OK: return 0;
  case INSOLE_ERR_ARGUMENT: return 2;
  case INSOLE_ERR_INPUT: return 2;
  case INSOLE_ERR_NUMERIC: return 3;
  case INSOLE_ERR_DEGENERATE: return 4;
  }
  return 2;
}

int finish(insole_status status) {
  if (status != INSOLE_OK)
    std::fprintf(stderr, "insole: error: %s\n", insole_last_error());
  return exit_code(status);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Insole GRF estimation pipeline"};
  app.require_subcommand(1);
  app.fallthrough(); // global flags may follow the subcommand

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
  bool deterministic = false;
  app.add_option("--config", config_path, "key = value configuration file")
      ->expected(1);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "RNG seed (overrides config run.seed)")
      ->each([&seed_set](const std::string &) { seed_set = true; });
  app.add_option("--jobs", jobs, "worker threads for identification")
      ->check(CLI::PositiveNumber);
  app.add_flag("--deterministic", deterministic,
               "suppress timestamps for byte-identical reruns");

  auto *sim = app.add_subcommand("simulate", "generate a synthetic dataset");

  std::vector<std::string> ident_metas;
  auto *ident = app.add_subcommand("ident", "identify models from trials");
  ident->add_option("metas", ident_metas, "trial .meta files")->required();

  std::vector<std::string> validate_models, validate_metas;
  auto *validate =
      app.add_subcommand("validate", "evaluate saved models on trials");
  // One value per occurrence, so positional meta files are not swallowed.
  validate->add_option("--model", validate_models, "model file (repeatable)")
      ->required()
      ->expected(1)
      ->allow_extra_args(false)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  validate->add_option("metas", validate_metas, "trial .meta files")->required();

  std::string gait_meta;
  auto *gait = app.add_subcommand("gait", "gait-cycle segmentation and plots");
  gait->add_option("meta", gait_meta, "trial .meta file")->required();

  std::vector<std::string> report_dirs;
  auto *report = app.add_subcommand("report", "consolidate run directories");
  report->add_option("runs", report_dirs, "run directories with fit_report.csv")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  ConfigHandle config;
  if (!config.cfg) {
    std::fprintf(stderr, "insole: error: cannot allocate configuration\n");
    return 3;
  }
  if (!config_path.empty()) {
    const insole_status status = insole_config_load(config.cfg, config_path.c_str());
    if (status != INSOLE_OK)
      return finish(status);
  }
  if (seed_set)
    insole_config_set(config.cfg, "run.seed", std::to_string(seed).c_str());
  insole_config_set(config.cfg, "run.jobs", std::to_string(jobs).c_str());
  insole_config_set(config.cfg, "run.deterministic",
                    deterministic ? "true" : "false");

  if (sim->parsed())
    return finish(insole_cmd_simulate(config.cfg, out_dir.c_str()));
  if (ident->parsed()) {
    const auto metas = c_view(ident_metas);
    return finish(
        insole_cmd_ident(metas.data(), metas.size(), config.cfg, out_dir.c_str()));
  }
  if (validate->parsed()) {
    const auto models = c_view(validate_models);
    const auto metas = c_view(validate_metas);
    return finish(insole_cmd_validate(models.data(), models.size(), metas.data(),
                                      metas.size(), config.cfg, out_dir.c_str()));
  }
  if (gait->parsed())
    return finish(insole_cmd_gait(gait_meta.c_str(), config.cfg, out_dir.c_str()));
  if (report->parsed()) {
    const auto runs = c_view(report_dirs);
    return finish(insole_cmd_report(runs.data(), runs.size(), config.cfg,
                                    out_dir.c_str()));
  }
  return 2;
}
