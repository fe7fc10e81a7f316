#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace insole {

struct LmOptions {
  int max_iters = 200;
  double tol_rel_cost = 1e-6;
  double lambda0 = 1e-3;
  double lambda_scale = 3.0; // x3 on reject, /3 on accept
  double lambda_max = 1e12;
};

struct LmResult {
  Eigen::VectorXd params;
  double cost = 0.0;          // sum of squared residuals
  std::vector<double> trace;  // cost after init and each accepted step
  int iterations = 0;
  bool converged = false;
};

// Output-error Levenberg-Marquardt. residual(p) returns the residual vector,
// jacobian(p) its analytic Jacobian. project maps a candidate parameter
// vector onto the feasible set (stability projection) before it is costed,
// so every accepted iterate is feasible and the trace never increases.
LmResult levenberg_marquardt(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd &)> &residual,
    const std::function<Eigen::MatrixXd(const Eigen::VectorXd &)> &jacobian,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd &)> &project,
    const Eigen::VectorXd &p0, const LmOptions &opts = {});

} // namespace insole
