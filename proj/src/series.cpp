#include "series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace insole {

const char *to_string(Unit u) {
  switch (u) {
  case Unit::Volts: return "volts";
  case Unit::Ohms: return "ohms";
  case Unit::Percent: return "percent";
  case Unit::Newtons: return "newtons";
  }
  return "?";
}

const char *to_string(Channel c) {
  switch (c) {
  case Channel::HL: return "hl";
  case Channel::MF: return "mf";
  case Channel::MT: return "mt";
  case Channel::TO: return "to";
  }
  return "?";
}

const char *to_string(Side s) { return s == Side::Left ? "left" : "right"; }

const char *to_string(Role r) {
  return r == Role::Identification ? "identification" : "validation";
}

const char *to_string(Component c) {
  return c == Component::Vertical ? "vertical" : "mediolateral";
}

ChannelSeries::ChannelSeries(std::vector<double> v, double rate, Unit u,
                             double start)
    : values(std::move(v)), rate_hz(rate), unit(u), t0(start) {
  require(rate_hz > 0.0, Fault::InvalidArgument, "sampling rate must be > 0");
}

void ChannelSeries::check_finite(const std::string &what) const {
  for (double x : values)
    require(std::isfinite(x), Fault::SchemaError, what + " contains non-finite samples");
}

double mean(const std::vector<double> &v) {
  if (v.empty())
    return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double> &v) {
  if (v.size() < 2)
    return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v)
    ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
  require(!v.empty(), Fault::InvalidArgument, "median of empty series");
  const std::size_t n = v.size();
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1)
    return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

double quantile_sorted(const std::vector<double> &sorted, double p) {
  require(!sorted.empty(), Fault::InvalidArgument, "quantile of empty series");
  if (sorted.size() == 1)
    return sorted.front();
  p = std::clamp(p, 0.0, 1.0);
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size())
    return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace insole
