#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "series.hpp"

namespace insole {

// Discrete-time MISO transfer function with per-channel numerators and input
// delays over one shared monic denominator:
//
//   y[n] = sum_c sum_j num[c][j] * u_c[n - delay[c] - j] - sum_i den[i] * y[n - i]
//
// den is stored without the leading 1, so den.size() is the denominator
// order n_a. Simulation always starts from zero initial conditions.
struct LtiBlock {
  std::array<std::vector<double>, 4> num;
  std::array<std::size_t, 4> delay{0, 0, 0, 0};
  std::vector<double> den;

  std::size_t order() const { return den.size(); }
  // Samples affected by the zero initial conditions: max(n_a, n_b + n_k).
  std::size_t warmup() const;

  // Unit gain on one channel, passthrough.
  static LtiBlock unit_gain(int channel);
};

// Roots of z^n + den[0] z^(n-1) + ... + den[n-1].
std::vector<std::complex<double>> denominator_roots(const std::vector<double> &den);

bool is_stable(const LtiBlock &g, double margin = 0.0);

// Reflect denominator roots with |z| >= 1 to 0.99 / |z| and rebuild real
// coefficients. Stable blocks pass through unchanged.
void stabilize(LtiBlock &g);
std::vector<double> stabilize_denominator(const std::vector<double> &den);

// Zero-initial-condition simulation. Throws UnstableBlock when g is not
// stable, InvalidArgument on length mismatches.
std::vector<double> lti_apply(const LtiBlock &g,
                              const std::array<std::vector<double>, 4> &u);
ChannelSeries lti_apply(const LtiBlock &g,
                        const std::array<ChannelSeries, 4> &u);

// One-channel helper, y = (1/A)(x): y[n] = x[n] - sum_i den[i] y[n-i].
// The identification Jacobian uses this to propagate sensitivities.
std::vector<double> filter_inverse_den(const std::vector<double> &den,
                                       const std::vector<double> &x);

// First n samples of the impulse response of channel c (oracle helper).
std::vector<double> impulse_response(const LtiBlock &g, int channel, std::size_t n);

} // namespace insole
