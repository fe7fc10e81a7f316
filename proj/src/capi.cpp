#include "insole/insole.h"

#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include "config.hpp"
#include "dataio.hpp"
#include "error.hpp"
#include "ident.hpp"
#include "model.hpp"
#include "pipeline.hpp"

struct insole_config {
  insole::Config cfg;
};

struct insole_trial {
  insole::Trial trial;
};

struct insole_model {
  insole::Model model;
};

namespace {

thread_local std::string g_last_error;

insole_status status_of(const insole::PipelineError &e) {
  switch (e.fault_category()) {
  case insole::FaultCategory::Argument: return INSOLE_ERR_ARGUMENT;
  case insole::FaultCategory::Input: return INSOLE_ERR_INPUT;
  case insole::FaultCategory::Numeric: return INSOLE_ERR_NUMERIC;
  case insole::FaultCategory::Degenerate: return INSOLE_ERR_DEGENERATE;
  }
  return INSOLE_ERR_ARGUMENT;
}

template <typename Fn> insole_status guarded(Fn &&fn) {
  try {
    fn();
    g_last_error.clear();
    return INSOLE_OK;
  } catch (const insole::PipelineError &e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return INSOLE_ERR_NUMERIC;
  }
}

insole_status invalid_argument(const char *msg) {
  g_last_error = msg;
  return INSOLE_ERR_ARGUMENT;
}

std::vector<std::string> to_strings(const char *const *items, size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (!items[i])
      throw insole::PipelineError(insole::Fault::InvalidArgument,
                                  "null path in argument list");
    out.emplace_back(items[i]);
  }
  return out;
}

insole::Config config_or_empty(const insole_config *cfg) {
  return cfg ? cfg->cfg : insole::Config{};
}

} // namespace

extern "C" {

const char *insole_version(void) { return insole::kToolVersion; }

const char *insole_last_error(void) { return g_last_error.c_str(); }

insole_status insole_config_create(insole_config **out) {
  if (!out)
    return invalid_argument("null output handle");
  return guarded([&] { *out = new insole_config{}; });
}

insole_status insole_config_load(insole_config *cfg, const char *path) {
  if (!cfg || !path)
    return invalid_argument("null config or path");
  return guarded([&] { cfg->cfg.load_file(path); });
}

insole_status insole_config_set(insole_config *cfg, const char *key,
                                const char *value) {
  if (!cfg || !key || !value)
    return invalid_argument("null config, key or value");
  return guarded([&] { cfg->cfg.set(key, value); });
}

const char *insole_config_get(const insole_config *cfg, const char *key) {
  if (!cfg || !key)
    return nullptr;
  thread_local std::string value;
  auto v = cfg->cfg.get(key);
  if (!v)
    return nullptr;
  value = *v;
  return value.c_str();
}

void insole_config_free(insole_config *cfg) { delete cfg; }

insole_status insole_trial_load(const char *meta_path,
                                const insole_config *overrides,
                                insole_trial **out) {
  if (!meta_path || !out)
    return invalid_argument("null path or output handle");
  return guarded([&] {
    auto trial = new insole_trial{
        insole::parse_trial(meta_path, overrides ? &overrides->cfg : nullptr)};
    *out = trial;
  });
}

void insole_trial_free(insole_trial *trial) { delete trial; }

size_t insole_trial_length(const insole_trial *trial) {
  return trial ? trial->trial.size() : 0;
}

double insole_trial_rate_hz(const insole_trial *trial) {
  return trial ? trial->trial.rate_hz() : 0.0;
}

int insole_trial_role(const insole_trial *trial) {
  if (!trial)
    return -1;
  return trial->trial.role == insole::Role::Identification
             ? INSOLE_ROLE_IDENTIFICATION
             : INSOLE_ROLE_VALIDATION;
}

int insole_trial_side(const insole_trial *trial) {
  if (!trial)
    return -1;
  return trial->trial.insole.side == insole::Side::Left ? INSOLE_SIDE_LEFT
                                                        : INSOLE_SIDE_RIGHT;
}

double insole_trial_speed_mps(const insole_trial *trial) {
  return trial ? trial->trial.speed_mps : 0.0;
}

insole_status insole_trial_delta_r(const insole_trial *trial, int channel,
                                   const double **data, size_t *n) {
  if (!trial || !data || !n)
    return invalid_argument("null trial or output");
  if (channel < 0 || channel >= insole::kNumChannels)
    return invalid_argument("channel out of range");
  *data = trial->trial.insole.channels[channel].values.data();
  *n = trial->trial.insole.channels[channel].values.size();
  return INSOLE_OK;
}

insole_status insole_trial_grf(const insole_trial *trial, int component,
                               const double **data, size_t *n) {
  if (!trial || !data || !n)
    return invalid_argument("null trial or output");
  if (component != INSOLE_GRF_VERTICAL && component != INSOLE_GRF_MEDIOLATERAL)
    return invalid_argument("component out of range");
  const auto &series = component == INSOLE_GRF_VERTICAL
                           ? trial->trial.grf.vertical
                           : trial->trial.grf.mediolateral;
  *data = series.values.data();
  *n = series.values.size();
  return INSOLE_OK;
}

insole_status insole_model_load(const char *path, insole_model **out) {
  if (!path || !out)
    return invalid_argument("null path or output handle");
  return guarded([&] { *out = new insole_model{insole::load_model(path)}; });
}

insole_status insole_model_save(const insole_model *model, const char *path) {
  if (!model || !path)
    return invalid_argument("null model or path");
  return guarded([&] { insole::save_model(model->model, path); });
}

void insole_model_free(insole_model *model) { delete model; }

int insole_model_kind(const insole_model *model) {
  if (!model)
    return -1;
  return std::holds_alternative<insole::HwModel>(model->model)
             ? INSOLE_MODEL_HW
             : INSOLE_MODEL_LINEAR;
}

int insole_model_component(const insole_model *model) {
  if (!model)
    return -1;
  return insole::model_meta(model->model).component == "mediolateral"
             ? INSOLE_GRF_MEDIOLATERAL
             : INSOLE_GRF_VERTICAL;
}

int insole_model_side(const insole_model *model) {
  if (!model)
    return -1;
  return insole::model_meta(model->model).side == "right" ? INSOLE_SIDE_RIGHT
                                                          : INSOLE_SIDE_LEFT;
}

insole_status insole_model_simulate(const insole_model *model,
                                    const insole_trial *trial, double *out,
                                    size_t capacity) {
  if (!model || !trial || !out)
    return invalid_argument("null model, trial or output buffer");
  if (capacity < trial->trial.size())
    return invalid_argument("output buffer too small");
  return guarded([&] {
    const auto est =
        insole::model_simulate(model->model, trial->trial.delta_r());
    std::memcpy(out, est.data(), est.size() * sizeof(double));
  });
}

insole_status insole_identify(const insole_trial *ident,
                              const insole_trial *const *validation,
                              size_t n_validation, int component,
                              const insole_config *cfg, insole_model **out) {
  if (!ident || !out || (n_validation > 0 && !validation))
    return invalid_argument("null trial or output handle");
  if (component != INSOLE_GRF_VERTICAL && component != INSOLE_GRF_MEDIOLATERAL)
    return invalid_argument("component out of range");
  return guarded([&] {
    const insole::Config config = config_or_empty(cfg);
    insole::IdentConfig icfg = insole::IdentConfig::from_config(config);
    std::vector<const insole::Trial *> valid;
    for (size_t i = 0; i < n_validation; ++i) {
      if (!validation[i])
        throw insole::PipelineError(insole::Fault::InvalidArgument,
                                    "null validation trial");
      valid.push_back(&validation[i]->trial);
    }
    const insole::Component comp = component == INSOLE_GRF_VERTICAL
                                       ? insole::Component::Vertical
                                       : insole::Component::Mediolateral;
    insole::IdentResult result =
        insole::grid_search(ident->trial, valid, comp, icfg);
    *out = new insole_model{std::move(result.model)};
  });
}

insole_status insole_evaluate(const insole_model *model,
                              const insole_trial *trial,
                              insole_fit_report *out) {
  if (!model || !trial || !out)
    return invalid_argument("null model, trial or output");
  return guarded([&] {
    const auto &meta = insole::model_meta(model->model);
    const insole::Component comp = meta.component == "mediolateral"
                                       ? insole::Component::Mediolateral
                                       : insole::Component::Vertical;
    const insole::FitReport report =
        insole::evaluate_full(model->model, trial->trial, comp);
    out->nrmse_fit_pct = report.nrmse_fit_pct;
    out->r_squared = report.r_squared;
    out->r_squared_series = report.r_squared_series;
    out->rmse_abs = report.rmse_abs;
    out->rmse_abs_cycle = report.rmse_abs_cycle;
    out->rmse_norm_max_pct = report.rmse_norm_max_pct;
    out->rmse_norm_range_pct = report.rmse_norm_range_pct;
    out->n_samples = report.n_samples;
    out->warmup_excluded = report.warmup_excluded;
  });
}

insole_status insole_cmd_simulate(const insole_config *cfg, const char *out_dir) {
  if (!out_dir)
    return invalid_argument("null output directory");
  return guarded([&] { insole::cmd_simulate(config_or_empty(cfg), out_dir); });
}

insole_status insole_cmd_ident(const char *const *meta_paths, size_t n_paths,
                               const insole_config *cfg, const char *out_dir) {
  if (!out_dir || (n_paths > 0 && !meta_paths))
    return invalid_argument("null arguments");
  return guarded([&] {
    insole::cmd_ident(to_strings(meta_paths, n_paths), config_or_empty(cfg),
                      out_dir);
  });
}

insole_status insole_cmd_validate(const char *const *model_paths,
                                  size_t n_models,
                                  const char *const *meta_paths, size_t n_paths,
                                  const insole_config *cfg,
                                  const char *out_dir) {
  if (!out_dir || (n_models > 0 && !model_paths) || (n_paths > 0 && !meta_paths))
    return invalid_argument("null arguments");
  return guarded([&] {
    insole::cmd_validate(to_strings(model_paths, n_models),
                         to_strings(meta_paths, n_paths), config_or_empty(cfg),
                         out_dir);
  });
}

insole_status insole_cmd_gait(const char *meta_path, const insole_config *cfg,
                              const char *out_dir) {
  if (!meta_path || !out_dir)
    return invalid_argument("null arguments");
  return guarded(
      [&] { insole::cmd_gait(meta_path, config_or_empty(cfg), out_dir); });
}

insole_status insole_cmd_report(const char *const *run_dirs, size_t n_dirs,
                                const insole_config *cfg, const char *out_dir) {
  if (!out_dir || (n_dirs > 0 && !run_dirs))
    return invalid_argument("null arguments");
  return guarded([&] {
    insole::cmd_report(to_strings(run_dirs, n_dirs), config_or_empty(cfg),
                       out_dir);
  });
}

} // extern "C"
