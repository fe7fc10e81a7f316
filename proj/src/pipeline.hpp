#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "dataio.hpp"
#include "gait.hpp"
#include "metrics.hpp"
#include "model.hpp"

namespace insole {

inline constexpr const char *kToolVersion = "0.1.0";

struct RunOptions {
  std::uint64_t seed = 0;
  int jobs = 1;
  bool deterministic = false;

  static RunOptions from_config(const Config &cfg);
};

// Every metric of a model against a trial; gait cycles are segmented from
// the measured vertical force, cycle metrics fall back to NaN when no
// cycles exist.
FitReport evaluate_full(const Model &model, const Trial &trial,
                        Component component, bool warmup_excluded = true);

// Pipeline commands behind the C API / CLI. Each writes its outputs plus a
// manifest.json into out_dir and nowhere else.
void cmd_simulate(const Config &cfg, const std::string &out_dir);
void cmd_ident(const std::vector<std::string> &meta_paths, const Config &cfg,
               const std::string &out_dir);
void cmd_validate(const std::vector<std::string> &model_paths,
                  const std::vector<std::string> &meta_paths, const Config &cfg,
                  const std::string &out_dir);
void cmd_gait(const std::string &meta_path, const Config &cfg,
              const std::string &out_dir);
void cmd_report(const std::vector<std::string> &run_dirs, const Config &cfg,
                const std::string &out_dir);

} // namespace insole
