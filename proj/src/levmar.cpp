#include "levmar.hpp"

#include <cmath>

#include "error.hpp"

namespace insole {

namespace {

double cost_of(const Eigen::VectorXd &r) { return r.squaredNorm(); }

} // namespace

LmResult levenberg_marquardt(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd &)> &residual,
    const std::function<Eigen::MatrixXd(const Eigen::VectorXd &)> &jacobian,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd &)> &project,
    const Eigen::VectorXd &p0, const LmOptions &opts) {
  LmResult result;
  result.params = project(p0);
  Eigen::VectorXd r = residual(result.params);
  result.cost = cost_of(r);
  result.trace.push_back(result.cost);
  require(std::isfinite(result.cost), Fault::DivergedOptimization,
          "initial cost is not finite");

  double lambda = opts.lambda0;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    result.iterations = iter + 1;
    const Eigen::MatrixXd J = jacobian(result.params);
    const Eigen::MatrixXd jtj = J.transpose() * J;
    const Eigen::VectorXd jtr = J.transpose() * r;

    bool accepted = false;
    while (lambda <= opts.lambda_max) {
      Eigen::MatrixXd damped = jtj;
      for (Eigen::Index i = 0; i < damped.rows(); ++i)
        damped(i, i) += lambda * std::max(jtj(i, i), 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
      if (!step.allFinite()) {
        lambda *= opts.lambda_scale;
        continue;
      }
      const Eigen::VectorXd candidate = project(result.params + step);
      const Eigen::VectorXd r_new = residual(candidate);
      const double cost_new = cost_of(r_new);
      if (std::isfinite(cost_new) && cost_new < result.cost) {
        const double rel_drop = (result.cost - cost_new) / std::max(result.cost, 1e-300);
        result.params = candidate;
        r = r_new;
        result.cost = cost_new;
        result.trace.push_back(result.cost);
        lambda = std::max(lambda / opts.lambda_scale, 1e-12);
        accepted = true;
        if (rel_drop < opts.tol_rel_cost)
          result.converged = true;
        break;
      }
      lambda *= opts.lambda_scale;
    }
    if (!accepted) {
      // No affordable descent direction left; treat the current iterate as
      // converged rather than diverged (cost never increased).
      result.converged = true;
      break;
    }
    if (result.converged)
      break;
  }
  return result;
}

} // namespace insole
