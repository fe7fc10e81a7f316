#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "config.hpp"
#include "dataio.hpp"
#include "levmar.hpp"
#include "metrics.hpp"
#include "model.hpp"

namespace insole {

struct OrderSpec {
  std::size_t nb = 3;
  std::size_t na = 2;
  std::size_t nk = 0;
};

struct IdentConfig {
  std::vector<std::size_t> breakpoint_grid{5, 6, 7, 8, 9, 10};
  std::vector<OrderSpec> orders{{3, 2, 0}};
  int max_iters = 200;
  double tol_rel_cost = 1e-6;
  std::size_t multistarts = 8;
  std::uint64_t seed = 0;
  bool warmup_excluded = true;
  int jobs = 1;
  double min_duration_s = 10.0;
  // Validation fits within this band count as a tie and the smaller model
  // wins (exact float ties never happen in practice).
  double tie_tol_fit_pct = 0.1;

  void validate() const;
  // ident.* keys: breakpoints ("5:10" or "5,7,9"), orders ("3,2,0;4,3,1"),
  // max_iters, tol, multistarts, seed.
  static IdentConfig from_config(const Config &cfg);
};

struct CandidateFit {
  std::size_t k = 0;     // 0 = linear
  std::size_t order = 0; // index into cfg.orders
  std::size_t start = 0; // winning multistart
  std::size_t param_count = 0;
  double cost = 0.0;
  double fit_ident = 0.0;
  double fit_valid_mean = 0.0;
};

struct IdentResult {
  Model model;
  FitReport fit_ident;
  std::vector<FitReport> fit_valid;
  std::vector<double> trace; // winning candidate's accepted-step costs
  std::size_t chosen_k = 0;  // 0 for linear
  double cost = 0.0;         // final output-error cost (sum of squares)
  std::vector<CandidateFit> candidates;
  std::vector<Model> candidate_models; // parallel to candidates
};

// --- packed output-error problems (exposed for the Jacobian checks) --------

// Linear MISO model, parameters [num(4 x nb), den(na), offset].
class LinearProblem {
public:
  LinearProblem(std::array<std::vector<double>, 4> u, std::vector<double> y,
                OrderSpec order, bool warmup_excluded);

  std::size_t param_count() const { return 4 * order_.nb + order_.na + 1; }
  std::size_t warmup() const { return warmup_; }

  Eigen::VectorXd residual(const Eigen::VectorXd &p) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd &p) const;
  // Stability projection of the denominator entries.
  Eigen::VectorXd project(const Eigen::VectorXd &p) const;

  Eigen::VectorXd pack(const LinearModel &m) const;
  LinearModel unpack(const Eigen::VectorXd &p) const;

private:
  std::vector<double> simulate(const Eigen::VectorXd &p) const;
  std::array<std::vector<double>, 4> u_;
  std::vector<double> y_;
  OrderSpec order_;
  std::size_t warmup_;
};

// Hammerstein-Wiener problem with fixed breakpoint x-grids, parameters
// [f1 y (4 x k), num(4 x nb), den(na), f2 y (k)].
class HwProblem {
public:
  HwProblem(std::array<std::vector<double>, 4> u, std::vector<double> y,
            std::array<std::vector<double>, 4> f1_x, std::vector<double> f2_x,
            OrderSpec order, bool warmup_excluded);

  std::size_t breakpoints() const { return f2_x_.size(); }
  std::size_t param_count() const {
    return 5 * f2_x_.size() + 4 * order_.nb + order_.na;
  }
  std::size_t warmup() const { return warmup_; }

  Eigen::VectorXd residual(const Eigen::VectorXd &p) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd &p) const;
  Eigen::VectorXd project(const Eigen::VectorXd &p) const;

  Eigen::VectorXd pack(const HwModel &m) const;
  HwModel unpack(const Eigen::VectorXd &p) const;

  // Identity-through init that reproduces a linear model exactly
  // (f1 identity on the input knots, f2 = x + offset on the output knots).
  Eigen::VectorXd init_from_linear(const LinearModel &lin) const;

private:
  struct Knot {
    std::uint32_t left;
    double t;
  };
  std::vector<double> lti_out(const Eigen::VectorXd &p,
                              const std::array<std::vector<double>, 4> &v) const;
  std::array<std::vector<double>, 4> eval_f1(const Eigen::VectorXd &p) const;

  std::array<std::vector<double>, 4> u_;
  std::vector<double> y_;
  std::array<std::vector<double>, 4> f1_x_;
  std::vector<double> f2_x_;
  std::array<std::vector<Knot>, 4> phi_; // fixed f1 basis per sample
  OrderSpec order_;
  std::size_t warmup_;
};

// Equation-error (ARX) least-squares initialization; throws
// RankDeficientRegressor when the regressor loses rank.
LinearModel arx_initialize(const std::array<std::vector<double>, 4> &u,
                           const std::vector<double> &y, OrderSpec order);

IdentResult identify_linear(const Trial &ident, Component component,
                            const IdentConfig &cfg);
IdentResult identify_hw(const Trial &ident, Component component, std::size_t k,
                        const IdentConfig &cfg);

// Breakpoint-count grid search plus the linear candidate; selects the model
// with the highest mean validation NRMSE fit (ties -> fewer parameters).
IdentResult grid_search(const Trial &ident, const std::vector<const Trial *> &valid,
                        Component component, const IdentConfig &cfg);

} // namespace insole
