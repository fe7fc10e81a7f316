#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "lti.hpp"
#include "pwl.hpp"
#include "series.hpp"

namespace insole {

// Record of the affine renormalization applied to each input nonlinearity at
// identification time (output mean 0, standard deviation 1 on the
// identification data). Kept for traceability; the transform itself is baked
// into the coefficients.
struct NormRecord {
  std::array<double, 4> f1_mean{0, 0, 0, 0};
  std::array<double, 4> f1_std{1, 1, 1, 1};
  bool applied = false;
};

struct IdentMeta {
  std::uint64_t dataset_hash = 0;
  std::size_t breakpoints = 0; // 0 for linear models
  std::uint64_t seed = 0;
  std::string side;      // "left" / "right" / "" when unknown
  std::string component; // "vertical" / "mediolateral" / ""
};

// Static nonlinearity per channel, shared MISO linear block, output
// nonlinearity.
struct HwModel {
  std::array<PwlFunction, 4> f1;
  LtiBlock g;
  PwlFunction f2;
  NormRecord norm;
  IdentMeta meta;

  std::size_t warmup() const { return g.warmup(); }
};

struct LinearModel {
  LtiBlock g;
  double offset = 0.0;
  IdentMeta meta;

  std::size_t warmup() const { return g.warmup(); }
};

using Model = std::variant<LinearModel, HwModel>;

std::vector<double> hw_simulate(const HwModel &m,
                                const std::array<std::vector<double>, 4> &dr);
std::vector<double> linear_simulate(const LinearModel &m,
                                    const std::array<std::vector<double>, 4> &dr);
std::vector<double> model_simulate(const Model &m,
                                   const std::array<std::vector<double>, 4> &dr);
std::size_t model_warmup(const Model &m);
const IdentMeta &model_meta(const Model &m);
IdentMeta &model_meta(Model &m);

// Self-describing text serialization (JSON, schema_version field, numeric
// values round-trip exactly).
std::string serialize_model(const Model &m);
Model deserialize_model(const std::string &text);
void save_model(const Model &m, const std::string &path);
Model load_model(const std::string &path);

// Apply the normalization convention in place: every f1 output gets mean 0 /
// std 1 over the identification inputs; numerators and f2 absorb the change
// so the simulated output is unchanged. Channels with zero output variance
// are left alone.
void normalize_hw(HwModel &m, const std::array<std::vector<double>, 4> &ident_dr);

} // namespace insole
