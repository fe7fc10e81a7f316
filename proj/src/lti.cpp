#include "lti.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace insole {

std::size_t LtiBlock::warmup() const {
  std::size_t w = order();
  for (int c = 0; c < kNumChannels; ++c)
    w = std::max(w, num[c].size() + delay[c]);
  return w;
}

LtiBlock LtiBlock::unit_gain(int channel) {
  LtiBlock g;
  for (int c = 0; c < kNumChannels; ++c)
    g.num[c] = {c == channel ? 1.0 : 0.0};
  return g;
}

std::vector<std::complex<double>> denominator_roots(const std::vector<double> &den) {
  const std::size_t n = den.size();
  if (n == 0)
    return {};
  if (n == 1)
    return {std::complex<double>(-den[0], 0.0)};
  // Companion matrix of the monic polynomial.
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                               static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    comp(0, static_cast<Eigen::Index>(i)) = -den[i];
  for (std::size_t i = 1; i < n; ++i)
    comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(comp, false);
  std::vector<std::complex<double>> roots(n);
  for (std::size_t i = 0; i < n; ++i)
    roots[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));
  return roots;
}

bool is_stable(const LtiBlock &g, double margin) {
  for (const auto &r : denominator_roots(g.den))
    if (std::abs(r) >= 1.0 - margin)
      return false;
  return true;
}

std::vector<double> stabilize_denominator(const std::vector<double> &den) {
  if (den.empty())
    return den;
  auto roots = denominator_roots(den);
  bool changed = false;
  for (auto &r : roots) {
    const double mag = std::abs(r);
    if (mag >= 1.0) {
      r *= (0.99 / mag) / mag; // new modulus 0.99 / |z|, same angle
      changed = true;
    }
  }
  if (!changed)
    return den;

  // Rebuild real coefficients from the root multiset. Sorting first keeps the
  // reconstruction deterministic; conjugates pair up within tolerance because
  // the companion eigenvalues of a real polynomial come in conjugate pairs.
  std::sort(roots.begin(), roots.end(), [](const auto &a, const auto &b) {
    if (a.real() != b.real())
      return a.real() < b.real();
    return a.imag() < b.imag();
  });
  std::vector<std::complex<double>> poly{1.0};
  for (const auto &r : roots) {
    std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= poly[i] * r;
    }
    poly = std::move(next);
  }
  std::vector<double> out(den.size());
  for (std::size_t i = 0; i < den.size(); ++i)
    out[i] = poly[i + 1].real();
  return out;
}

void stabilize(LtiBlock &g) { g.den = stabilize_denominator(g.den); }

std::vector<double> lti_apply(const LtiBlock &g,
                              const std::array<std::vector<double>, 4> &u) {
  const std::size_t n = u[0].size();
  for (int c = 1; c < kNumChannels; ++c)
    require(u[c].size() == n, Fault::InvalidArgument,
            "input channels differ in length");
  require(is_stable(g), Fault::UnstableBlock, "denominator has roots outside the unit circle");

  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int c = 0; c < kNumChannels; ++c) {
      const auto &b = g.num[c];
      const std::size_t d = g.delay[c];
      for (std::size_t j = 0; j < b.size(); ++j) {
        const std::size_t lag = d + j;
        if (i >= lag)
          acc += b[j] * u[c][i - lag];
      }
    }
    for (std::size_t k = 0; k < g.den.size(); ++k)
      if (i > k)
        acc -= g.den[k] * y[i - 1 - k];
    y[i] = acc;
  }
  return y;
}

ChannelSeries lti_apply(const LtiBlock &g, const std::array<ChannelSeries, 4> &u) {
  for (int c = 1; c < kNumChannels; ++c)
    require(u[c].rate_hz == u[0].rate_hz, Fault::InvalidArgument,
            "input channels differ in rate");
  std::array<std::vector<double>, 4> raw;
  for (int c = 0; c < kNumChannels; ++c)
    raw[c] = u[c].values;
  return ChannelSeries(lti_apply(g, raw), u[0].rate_hz, u[0].unit, u[0].t0);
}

std::vector<double> filter_inverse_den(const std::vector<double> &den,
                                       const std::vector<double> &x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double acc = x[i];
    for (std::size_t k = 0; k < den.size(); ++k)
      if (i > k)
        acc -= den[k] * y[i - 1 - k];
    y[i] = acc;
  }
  return y;
}

std::vector<double> impulse_response(const LtiBlock &g, int channel, std::size_t n) {
  std::array<std::vector<double>, 4> u;
  for (int c = 0; c < kNumChannels; ++c)
    u[c].assign(n, 0.0);
  if (n > 0)
    u[channel][0] = 1.0;
  return lti_apply(g, u);
}

} // namespace insole
