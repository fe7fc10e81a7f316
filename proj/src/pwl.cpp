#include "pwl.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "series.hpp"

namespace insole {

PwlFunction::PwlFunction(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  require(xs_.size() >= 2, Fault::InvalidArgument, "PWL needs >= 2 breakpoints");
  require(xs_.size() == ys_.size(), Fault::InvalidArgument,
          "PWL breakpoint arrays differ in length");
  for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
    require(xs_[i] < xs_[i + 1], Fault::InvalidArgument,
            "PWL breakpoints_x must be strictly increasing");
  for (double v : xs_)
    require(std::isfinite(v), Fault::InvalidArgument, "PWL breakpoint x not finite");
  for (double v : ys_)
    require(std::isfinite(v), Fault::InvalidArgument, "PWL breakpoint y not finite");
}

PwlFunction PwlFunction::identity(double x0, double x1, std::size_t k) {
  require(k >= 2 && x1 > x0, Fault::InvalidArgument, "bad identity PWL span");
  std::vector<double> xs(k);
  for (std::size_t i = 0; i < k; ++i)
    xs[i] = x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(k - 1);
  std::vector<double> ys = xs;
  return PwlFunction(std::move(xs), std::move(ys));
}

PwlFunction::Basis PwlFunction::basis(double x) const {
  // Segment index clamped to [0, K-2]; end segments extend linearly.
  std::size_t left;
  if (x <= xs_.front()) {
    left = 0;
  } else if (x >= xs_.back()) {
    left = xs_.size() - 2;
  } else {
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    left = static_cast<std::size_t>(it - xs_.begin()) - 1;
    left = std::min(left, xs_.size() - 2);
  }
  const double t = (x - xs_[left]) / (xs_[left + 1] - xs_[left]);
  return {left, t};
}

double PwlFunction::operator()(double x) const {
  const Basis b = basis(x);
  return (1.0 - b.t) * ys_[b.left] + b.t * ys_[b.left + 1];
}

double PwlFunction::slope_at(double x) const {
  const Basis b = basis(x);
  return (ys_[b.left + 1] - ys_[b.left]) / (xs_[b.left + 1] - xs_[b.left]);
}

void PwlFunction::set_ys(std::vector<double> ys) {
  require(ys.size() == xs_.size(), Fault::InvalidArgument,
          "PWL y-vector length mismatch");
  ys_ = std::move(ys);
}

void PwlFunction::scale_shift_y(double scale, double shift) {
  for (double &y : ys_)
    y = scale * y + shift;
}

void PwlFunction::shift_x(double delta) {
  for (double &x : xs_)
    x += delta;
}

bool PwlFunction::monotone_y() const {
  bool inc = true, dec = true;
  for (std::size_t i = 0; i + 1 < ys_.size(); ++i) {
    inc = inc && ys_[i] <= ys_[i + 1];
    dec = dec && ys_[i] >= ys_[i + 1];
  }
  return inc || dec;
}

std::vector<double> quantile_knots(std::vector<double> data, std::size_t k) {
  require(k >= 2, Fault::InvalidArgument, "need at least 2 knots");
  require(!data.empty(), Fault::InvalidArgument, "no data for quantile knots");
  std::sort(data.begin(), data.end());
  const double range = data.back() - data.front();
  require(range > 0.0, Fault::DegenerateChannel,
          "channel has zero range, cannot place breakpoints");

  std::vector<double> knots(k);
  for (std::size_t i = 0; i < k; ++i)
    knots[i] = quantile_sorted(data, static_cast<double>(i) / static_cast<double>(k - 1));

  // Heavily repeated values (e.g. long swing phases at a constant level) can
  // collapse interior quantiles; keep knots strictly increasing.
  const double min_gap = 1e-9 * range;
  for (std::size_t i = 1; i < k; ++i)
    if (knots[i] <= knots[i - 1] + min_gap)
      knots[i] = knots[i - 1] + std::max(min_gap, range / static_cast<double>(8 * k));
  return knots;
}

} // namespace insole
