/* insole - ground reaction force estimation from piezoresistive insole data.
 *
 * C API of the shared library. All functions return insole_status; objects
 * are opaque handles released with the matching *_free call. Error details
 * for the last failing call on the current thread are available via
 * insole_last_error().
 */
#ifndef INSOLE_INSOLE_H
#define INSOLE_INSOLE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum insole_status {
  INSOLE_OK = 0,
  INSOLE_ERR_ARGUMENT = 1,   /* bad handle / argument / precondition */
  INSOLE_ERR_INPUT = 2,      /* file, schema or unit error */
  INSOLE_ERR_NUMERIC = 3,    /* diverged optimization, unstable block */
  INSOLE_ERR_DEGENERATE = 4  /* degenerate data (constant series, ...) */
} insole_status;

/* Insole channels, in distal order used throughout the library. */
enum { INSOLE_CH_HL = 0, INSOLE_CH_MF = 1, INSOLE_CH_MT = 2, INSOLE_CH_TO = 3 };
/* Ground reaction force components. */
enum { INSOLE_GRF_VERTICAL = 0, INSOLE_GRF_MEDIOLATERAL = 1 };
/* Trial roles. */
enum { INSOLE_ROLE_IDENTIFICATION = 0, INSOLE_ROLE_VALIDATION = 1 };
/* Sides. */
enum { INSOLE_SIDE_LEFT = 0, INSOLE_SIDE_RIGHT = 1 };
/* Model kinds. */
enum { INSOLE_MODEL_LINEAR = 0, INSOLE_MODEL_HW = 1 };

typedef struct insole_config insole_config;
typedef struct insole_trial insole_trial;
typedef struct insole_model insole_model;

typedef struct insole_fit_report {
  double nrmse_fit_pct;
  double r_squared;            /* averaged gait cycle */
  double r_squared_series;     /* raw time series, for transparency */
  double rmse_abs;             /* N, warm-up excluded */
  double rmse_abs_cycle;       /* N, on averaged cycles */
  double rmse_norm_max_pct;
  double rmse_norm_range_pct;
  size_t n_samples;
  size_t warmup_excluded;
} insole_fit_report;

const char *insole_version(void);

/* Message describing the last error raised on this thread, or "". */
const char *insole_last_error(void);

/* --- configuration (key = value text files) ------------------------------ */

insole_status insole_config_create(insole_config **out);
insole_status insole_config_load(insole_config *cfg, const char *path);
insole_status insole_config_set(insole_config *cfg, const char *key,
                                const char *value);
/* Returns NULL when the key is absent. Pointer valid until the next
 * mutating call on cfg. */
const char *insole_config_get(const insole_config *cfg, const char *key);
void insole_config_free(insole_config *cfg);

/* --- trials --------------------------------------------------------------- */

/* Load and condition a trial from its metadata file (which names the insole
 * and GRF CSVs). Keys in `overrides` (may be NULL) win over the meta file. */
insole_status insole_trial_load(const char *meta_path,
                                const insole_config *overrides,
                                insole_trial **out);
void insole_trial_free(insole_trial *trial);

size_t insole_trial_length(const insole_trial *trial);
double insole_trial_rate_hz(const insole_trial *trial);
int insole_trial_role(const insole_trial *trial);
int insole_trial_side(const insole_trial *trial);
double insole_trial_speed_mps(const insole_trial *trial);
/* Conditioned resistance change of one channel, percent. The pointer stays
 * valid for the lifetime of the trial. */
insole_status insole_trial_delta_r(const insole_trial *trial, int channel,
                                   const double **data, size_t *n);
insole_status insole_trial_grf(const insole_trial *trial, int component,
                               const double **data, size_t *n);

/* --- models ---------------------------------------------------------------- */

insole_status insole_model_load(const char *path, insole_model **out);
insole_status insole_model_save(const insole_model *model, const char *path);
void insole_model_free(insole_model *model);
int insole_model_kind(const insole_model *model);
int insole_model_component(const insole_model *model);
int insole_model_side(const insole_model *model);

/* Simulate the model over a trial's resistance-change channels; writes
 * insole_trial_length(trial) samples into out. */
insole_status insole_model_simulate(const insole_model *model,
                                    const insole_trial *trial, double *out,
                                    size_t capacity);

/* Identify the best model (breakpoint grid search + linear candidate) for
 * one GRF component from an identification trial and >= 1 validation
 * trials. Identification settings come from cfg (ident.* keys). */
insole_status insole_identify(const insole_trial *ident,
                              const insole_trial *const *validation,
                              size_t n_validation, int component,
                              const insole_config *cfg,
                              insole_model **out);

/* All evaluation metrics of a model against the measured GRF of a trial. */
insole_status insole_evaluate(const insole_model *model,
                              const insole_trial *trial,
                              insole_fit_report *out);

/* --- pipeline commands (the CLI maps one-to-one onto these) ---------------- */

/* Shared config keys: run.seed, run.jobs, run.deterministic. */
insole_status insole_cmd_simulate(const insole_config *cfg,
                                  const char *out_dir);
insole_status insole_cmd_ident(const char *const *meta_paths, size_t n_paths,
                               const insole_config *cfg, const char *out_dir);
insole_status insole_cmd_validate(const char *const *model_paths,
                                  size_t n_models,
                                  const char *const *meta_paths,
                                  size_t n_paths, const insole_config *cfg,
                                  const char *out_dir);
insole_status insole_cmd_gait(const char *meta_path,
                              const insole_config *cfg, const char *out_dir);
insole_status insole_cmd_report(const char *const *run_dirs, size_t n_dirs,
                                const insole_config *cfg,
                                const char *out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* INSOLE_INSOLE_H */
