#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "error.hpp"

namespace insole {

enum class Unit { Volts, Ohms, Percent, Newtons };

// Insole channels in proximal-to-distal order. Array indices throughout the
// library follow this order.
enum class Channel : int { HL = 0, MF = 1, MT = 2, TO = 3 };
inline constexpr int kNumChannels = 4;
inline constexpr std::array<Channel, 4> kChannels{Channel::HL, Channel::MF,
                                                  Channel::MT, Channel::TO};

enum class Side { Left, Right };
enum class Role { Identification, Validation };
enum class Component { Vertical, Mediolateral };

const char *to_string(Unit u);
const char *to_string(Channel c);
const char *to_string(Side s);
const char *to_string(Role r);
const char *to_string(Component c);

// Uniformly sampled scalar signal with a unit tag. Unit changes only happen
// through the explicit conversion operations in dataio.
struct ChannelSeries {
  std::vector<double> values;
  double rate_hz = 0.0;
  Unit unit = Unit::Volts;
  double t0 = 0.0;

  ChannelSeries() = default;
  ChannelSeries(std::vector<double> v, double rate, Unit u, double start = 0.0);

  std::size_t size() const { return values.size(); }
  double duration_s() const {
    return values.empty() ? 0.0 : static_cast<double>(values.size()) / rate_hz;
  }
  double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / rate_hz; }

  // Throws on NaN/Inf; conditioned series must be finite.
  void check_finite(const std::string &what) const;
};

double mean(const std::vector<double> &v);
// Sample standard deviation (n-1 denominator).
double stddev(const std::vector<double> &v);
double median(std::vector<double> v);
// Linear-interpolation quantile of sorted data at probability p in [0,1].
double quantile_sorted(const std::vector<double> &sorted, double p);

} // namespace insole
