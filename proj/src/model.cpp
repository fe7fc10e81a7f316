#include "model.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace insole {

using nlohmann::json;

std::vector<double> hw_simulate(const HwModel &m,
                                const std::array<std::vector<double>, 4> &dr) {
  std::array<std::vector<double>, 4> v;
  for (int c = 0; c < kNumChannels; ++c) {
    v[c].resize(dr[c].size());
    for (std::size_t i = 0; i < dr[c].size(); ++i)
      v[c][i] = m.f1[c](dr[c][i]);
  }
  std::vector<double> w = lti_apply(m.g, v);
  for (double &x : w)
    x = m.f2(x);
  return w;
}

std::vector<double> linear_simulate(const LinearModel &m,
                                    const std::array<std::vector<double>, 4> &dr) {
  std::vector<double> y = lti_apply(m.g, dr);
  for (double &x : y)
    x += m.offset;
  return y;
}

std::vector<double> model_simulate(const Model &m,
                                   const std::array<std::vector<double>, 4> &dr) {
  if (std::holds_alternative<LinearModel>(m))
    return linear_simulate(std::get<LinearModel>(m), dr);
  return hw_simulate(std::get<HwModel>(m), dr);
}

std::size_t model_warmup(const Model &m) {
  if (std::holds_alternative<LinearModel>(m))
    return std::get<LinearModel>(m).warmup();
  return std::get<HwModel>(m).warmup();
}

const IdentMeta &model_meta(const Model &m) {
  if (std::holds_alternative<LinearModel>(m))
    return std::get<LinearModel>(m).meta;
  return std::get<HwModel>(m).meta;
}

IdentMeta &model_meta(Model &m) {
  if (std::holds_alternative<LinearModel>(m))
    return std::get<LinearModel>(m).meta;
  return std::get<HwModel>(m).meta;
}

namespace {

constexpr int kSchemaVersion = 1;

json pwl_to_json(const PwlFunction &f) {
  return json{{"x", f.xs()}, {"y", f.ys()}};
}

PwlFunction pwl_from_json(const json &j) {
  return PwlFunction(j.at("x").get<std::vector<double>>(),
                     j.at("y").get<std::vector<double>>());
}

json lti_to_json(const LtiBlock &g) {
  json jnum = json::array();
  json jdelay = json::array();
  for (int c = 0; c < kNumChannels; ++c) {
    jnum.push_back(g.num[c]);
    jdelay.push_back(g.delay[c]);
  }
  return json{{"num", jnum}, {"delay", jdelay}, {"den", g.den}};
}

LtiBlock lti_from_json(const json &j) {
  LtiBlock g;
  const auto &jnum = j.at("num");
  const auto &jdelay = j.at("delay");
  require(jnum.size() == kNumChannels && jdelay.size() == kNumChannels,
          Fault::SchemaError, "model file: expected 4 input channels");
  for (int c = 0; c < kNumChannels; ++c) {
    g.num[c] = jnum[static_cast<std::size_t>(c)].get<std::vector<double>>();
    g.delay[c] = jdelay[static_cast<std::size_t>(c)].get<std::size_t>();
  }
  g.den = j.at("den").get<std::vector<double>>();
  return g;
}

json meta_to_json(const IdentMeta &meta) {
  return json{{"dataset_hash", meta.dataset_hash},
              {"breakpoints", meta.breakpoints},
              {"seed", meta.seed},
              {"side", meta.side},
              {"component", meta.component}};
}

IdentMeta meta_from_json(const json &j) {
  IdentMeta meta;
  meta.dataset_hash = j.value("dataset_hash", std::uint64_t{0});
  meta.breakpoints = j.value("breakpoints", std::size_t{0});
  meta.seed = j.value("seed", std::uint64_t{0});
  meta.side = j.value("side", std::string{});
  meta.component = j.value("component", std::string{});
  return meta;
}

} // namespace

std::string serialize_model(const Model &m) {
  json j;
  j["schema_version"] = kSchemaVersion;
  if (std::holds_alternative<LinearModel>(m)) {
    const auto &lm = std::get<LinearModel>(m);
    j["kind"] = "linear";
    j["lti"] = lti_to_json(lm.g);
    j["offset"] = lm.offset;
    j["meta"] = meta_to_json(lm.meta);
  } else {
    const auto &hw = std::get<HwModel>(m);
    j["kind"] = "hw";
    json jf1 = json::array();
    for (int c = 0; c < kNumChannels; ++c)
      jf1.push_back(pwl_to_json(hw.f1[c]));
    j["f1"] = jf1;
    j["lti"] = lti_to_json(hw.g);
    j["f2"] = pwl_to_json(hw.f2);
    j["norm"] = json{{"f1_mean", hw.norm.f1_mean},
                     {"f1_std", hw.norm.f1_std},
                     {"applied", hw.norm.applied}};
    j["meta"] = meta_to_json(hw.meta);
  }
  return j.dump(2) + "\n";
}

Model deserialize_model(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    raise(Fault::SchemaError, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    require(j.value("schema_version", -1) == kSchemaVersion, Fault::SchemaError,
            "unsupported model schema version");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
      LinearModel lm{lti_from_json(j.at("lti")), j.at("offset").get<double>(),
                     meta_from_json(j.value("meta", json::object()))};
      return lm;
    }
    require(kind == "hw", Fault::SchemaError, "unknown model kind: " + kind);
    const auto &jf1 = j.at("f1");
    require(jf1.size() == kNumChannels, Fault::SchemaError,
            "model file: expected 4 input nonlinearities");
    HwModel hw{{pwl_from_json(jf1[0]), pwl_from_json(jf1[1]),
                pwl_from_json(jf1[2]), pwl_from_json(jf1[3])},
               lti_from_json(j.at("lti")),
               pwl_from_json(j.at("f2")),
               {},
               meta_from_json(j.value("meta", json::object()))};
    if (j.contains("norm")) {
      const auto &jn = j["norm"];
      hw.norm.f1_mean = jn.at("f1_mean").get<std::array<double, 4>>();
      hw.norm.f1_std = jn.at("f1_std").get<std::array<double, 4>>();
      hw.norm.applied = jn.value("applied", false);
    }
    return hw;
  } catch (const json::exception &e) {
    raise(Fault::SchemaError, std::string("malformed model file: ") + e.what());
  }
}

void save_model(const Model &m, const std::string &path) {
  std::ofstream out(path);
  require(out.good(), Fault::IoError, "cannot write model file: " + path);
  out << serialize_model(m);
}

Model load_model(const std::string &path) {
  std::ifstream in(path);
  require(in.good(), Fault::IoError, "cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

void normalize_hw(HwModel &m, const std::array<std::vector<double>, 4> &ident_dr) {
  // Scale canonicalization is exactly output-invariant under zero initial
  // conditions: (sigma B / A)(v / sigma) == (B / A)(v) sample for sample.
  // The residual mean of each normalized f1 output is recorded instead of
  // being folded into the coefficients - a baked-in constant would pass
  // through the filter transient and change the simulated output.
  for (int c = 0; c < kNumChannels; ++c) {
    std::vector<double> v(ident_dr[c].size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = m.f1[c](ident_dr[c][i]);
    const double sigma = stddev(v);
    if (!(sigma > 0.0)) {
      m.norm.f1_mean[c] = mean(v);
      m.norm.f1_std[c] = 1.0;
      continue;
    }
    m.f1[c].scale_shift_y(1.0 / sigma, 0.0);
    for (double &b : m.g.num[c])
      b *= sigma;
    m.norm.f1_mean[c] = mean(v) / sigma;
    m.norm.f1_std[c] = sigma;
  }
  m.norm.applied = true;
}

} // namespace insole
