#pragma once

#include <cstddef>
#include <vector>

namespace insole {

// Continuous piecewise-linear function on strictly increasing breakpoints.
// Outside the breakpoint span the first/last segment slope extends linearly,
// so the function is total and the output is linear in the y-values for any
// fixed x-grid (the property the identification Jacobian relies on).
class PwlFunction {
public:
  PwlFunction(std::vector<double> xs, std::vector<double> ys);

  // k knots of y = x, evenly spaced over [x0, x1].
  static PwlFunction identity(double x0, double x1, std::size_t k);

  double operator()(double x) const;

  // value(x) = (1 - t) * y[left] + t * y[left + 1]; t may leave [0, 1] when
  // extrapolating.
  struct Basis {
    std::size_t left;
    double t;
  };
  Basis basis(double x) const;
  double slope_at(double x) const;

  std::size_t size() const { return xs_.size(); }
  const std::vector<double> &xs() const { return xs_; }
  const std::vector<double> &ys() const { return ys_; }
  void set_ys(std::vector<double> ys);
  // In-place affine remaps used by the normalization convention.
  void scale_shift_y(double scale, double shift);
  void shift_x(double delta);

  bool monotone_y() const;

private:
  std::vector<double> xs_, ys_;
};

// Strictly increasing knot grid at the k evenly spaced quantiles of data
// (probabilities 0, 1/(k-1), ..., 1). Throws DegenerateChannel when the data
// range collapses. Near-duplicate interior quantiles are nudged apart.
std::vector<double> quantile_knots(std::vector<double> data, std::size_t k);

} // namespace insole
