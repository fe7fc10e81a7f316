#include "ident.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <thread>
#include <utility>

#include "error.hpp"
#include "lti.hpp"
#include "pwl.hpp"
#include "rng.hpp"

namespace insole {

namespace {

// Raw MISO filter; stability is guaranteed by the LM projection, so no
// per-call root check.
std::vector<double> miso_filter(const std::array<const double *, 4> &num,
                                std::size_t nb, std::size_t nk,
                                const double *den, std::size_t na,
                                const std::array<std::vector<double>, 4> &v) {
  const std::size_t n = v[0].size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int c = 0; c < 4; ++c) {
      for (std::size_t j = 0; j < nb; ++j) {
        const std::size_t lag = nk + j;
        if (i >= lag)
          acc += num[c][j] * v[c][i - lag];
      }
    }
    for (std::size_t m = 0; m < na; ++m)
      if (i > m)
        acc -= den[m] * w[i - 1 - m];
    w[i] = acc;
  }
  return w;
}

std::vector<double> filter_single(const double *num, std::size_t nb,
                                  std::size_t nk, const double *den,
                                  std::size_t na, const std::vector<double> &x) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      const std::size_t lag = nk + j;
      if (i >= lag)
        acc += num[j] * x[i - lag];
    }
    for (std::size_t m = 0; m < na; ++m)
      if (i > m)
        acc -= den[m] * y[i - 1 - m];
    y[i] = acc;
  }
  return y;
}

void run_parallel(std::size_t n_units, int jobs,
                  const std::function<void(std::size_t)> &fn) {
  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(n_units)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n_units; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n_units)
          return;
        fn(i);
      }
    });
  for (auto &t : pool)
    t.join();
}

double nrmse_of(const std::vector<double> &f, const std::vector<double> &fhat,
                std::size_t warmup) {
  std::span<const double> a(f.data() + warmup, f.size() - warmup);
  std::span<const double> b(fhat.data() + warmup, fhat.size() - warmup);
  return nrmse_fit(a, b);
}

FitReport series_report(const Model &m, const Trial &trial, Component component,
                        bool warmup_excluded) {
  const auto est = model_simulate(m, trial.delta_r());
  const std::size_t warmup = warmup_excluded ? model_warmup(m) : 0;
  return full_report(trial.grf_component(component), est, warmup, {}, {});
}

} // namespace

void IdentConfig::validate() const {
  require(!breakpoint_grid.empty(), Fault::InvalidArgument,
          "breakpoint grid is empty");
  for (std::size_t k : breakpoint_grid)
    require(k >= 2 && k <= 50, Fault::InvalidArgument,
            "breakpoint counts must be in [2, 50]");
  require(!orders.empty(), Fault::InvalidArgument, "order grid is empty");
  for (const auto &o : orders) {
    require(o.nb >= 1, Fault::InvalidArgument, "n_b must be >= 1");
    require(o.na <= 12, Fault::InvalidArgument, "n_a too large");
  }
  require(multistarts >= 1, Fault::InvalidArgument, "multistarts must be >= 1");
  require(max_iters >= 0, Fault::InvalidArgument, "max_iters must be >= 0");
  require(tol_rel_cost > 0.0, Fault::InvalidArgument, "tol must be > 0");
}

namespace {

std::vector<std::size_t> parse_breakpoints(const std::string &text) {
  std::vector<std::size_t> grid;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const auto lo = static_cast<std::size_t>(std::stoul(text.substr(0, colon)));
    const auto hi = static_cast<std::size_t>(std::stoul(text.substr(colon + 1)));
    require(lo <= hi, Fault::SchemaError, "ident.breakpoints: bad range " + text);
    for (std::size_t k = lo; k <= hi; ++k)
      grid.push_back(k);
    return grid;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    grid.push_back(static_cast<std::size_t>(std::stoul(item)));
  return grid;
}

std::vector<OrderSpec> parse_orders(const std::string &text) {
  std::vector<OrderSpec> orders;
  std::stringstream ss(text);
  std::string triple;
  while (std::getline(ss, triple, ';')) {
    std::stringstream ts(triple);
    std::string cell;
    std::array<std::size_t, 3> vals{};
    for (int i = 0; i < 3; ++i) {
      require(static_cast<bool>(std::getline(ts, cell, ',')), Fault::SchemaError,
              "ident.orders: expected nb,na,nk triples");
      vals[static_cast<std::size_t>(i)] =
          static_cast<std::size_t>(std::stoul(cell));
    }
    orders.push_back({vals[0], vals[1], vals[2]});
  }
  return orders;
}

} // namespace

IdentConfig IdentConfig::from_config(const Config &cfg) {
  IdentConfig ic;
  if (cfg.has("ident.breakpoints"))
    ic.breakpoint_grid = parse_breakpoints(*cfg.get("ident.breakpoints"));
  if (cfg.has("ident.orders"))
    ic.orders = parse_orders(*cfg.get("ident.orders"));
  ic.max_iters = static_cast<int>(cfg.get_int("ident.max_iters", ic.max_iters));
  ic.tol_rel_cost = cfg.get_double("ident.tol", ic.tol_rel_cost);
  ic.multistarts =
      static_cast<std::size_t>(cfg.get_int("ident.multistarts",
                                           static_cast<std::int64_t>(ic.multistarts)));
  ic.seed = cfg.get_u64("ident.seed", cfg.get_u64("run.seed", ic.seed));
  ic.warmup_excluded = cfg.get_bool("ident.warmup_excluded", ic.warmup_excluded);
  ic.jobs = static_cast<int>(cfg.get_int("run.jobs", ic.jobs));
  ic.tie_tol_fit_pct = cfg.get_double("ident.tie_tol", ic.tie_tol_fit_pct);
  ic.validate();
  return ic;
}

// --- LinearProblem ----------------------------------------------------------

LinearProblem::LinearProblem(std::array<std::vector<double>, 4> u,
                             std::vector<double> y, OrderSpec order,
                             bool warmup_excluded)
    : u_(std::move(u)), y_(std::move(y)), order_(order) {
  warmup_ = warmup_excluded ? std::max(order_.na, order_.nb + order_.nk) : 0;
  require(y_.size() > warmup_ + param_count(), Fault::InvalidArgument,
          "series too short for the requested orders");
}

std::vector<double> LinearProblem::simulate(const Eigen::VectorXd &p) const {
  const std::size_t nb = order_.nb, na = order_.na;
  std::array<const double *, 4> num{};
  for (int c = 0; c < 4; ++c)
    num[c] = p.data() + static_cast<std::ptrdiff_t>(c * nb);
  const double *den = p.data() + static_cast<std::ptrdiff_t>(4 * nb);
  std::vector<double> w = miso_filter(num, nb, order_.nk, den, na, u_);
  const double offset = p(static_cast<Eigen::Index>(4 * nb + na));
  for (double &x : w)
    x += offset;
  return w;
}

Eigen::VectorXd LinearProblem::residual(const Eigen::VectorXd &p) const {
  const std::vector<double> yhat = simulate(p);
  const std::size_t rows = y_.size() - warmup_;
  Eigen::VectorXd r(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i)
    r(static_cast<Eigen::Index>(i)) = yhat[warmup_ + i] - y_[warmup_ + i];
  return r;
}

Eigen::MatrixXd LinearProblem::jacobian(const Eigen::VectorXd &p) const {
  const std::size_t nb = order_.nb, na = order_.na, nk = order_.nk;
  const std::size_t n = y_.size();
  const std::size_t rows = n - warmup_;
  const double *den = p.data() + static_cast<std::ptrdiff_t>(4 * nb);

  Eigen::MatrixXd J(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(param_count()));

  // dy/db_cj = (1/A)(u_c delayed by nk + j); one base filter pass per
  // channel, shifted for the higher-order taps.
  for (int c = 0; c < 4; ++c) {
    std::vector<double> delayed(n, 0.0);
    for (std::size_t i = nk; i < n; ++i)
      delayed[i] = u_[c][i - nk];
    const std::vector<double> base = filter_inverse_den(
        std::vector<double>(den, den + na), delayed);
    for (std::size_t j = 0; j < nb; ++j) {
      const std::size_t col = c * nb + j;
      for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t t = warmup_ + i;
        J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) =
            t >= j ? base[t - j] : 0.0;
      }
    }
  }

  // dy/da_m = -(1/A)(w delayed by m+1), with w the offset-free output.
  std::array<const double *, 4> num{};
  for (int c = 0; c < 4; ++c)
    num[c] = p.data() + static_cast<std::ptrdiff_t>(c * nb);
  const std::vector<double> w = miso_filter(num, nb, nk, den, na, u_);
  const std::vector<double> h =
      filter_inverse_den(std::vector<double>(den, den + na), w);
  for (std::size_t m = 0; m < na; ++m) {
    const std::size_t col = 4 * nb + m;
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t t = warmup_ + i;
      J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) =
          t >= m + 1 ? -h[t - 1 - m] : 0.0;
    }
  }

  J.col(static_cast<Eigen::Index>(4 * nb + na)).setOnes();
  return J;
}

Eigen::VectorXd LinearProblem::project(const Eigen::VectorXd &p) const {
  const std::size_t nb = order_.nb, na = order_.na;
  if (na == 0)
    return p;
  std::vector<double> den(p.data() + static_cast<std::ptrdiff_t>(4 * nb),
                          p.data() + static_cast<std::ptrdiff_t>(4 * nb + na));
  const std::vector<double> stable = stabilize_denominator(den);
  Eigen::VectorXd out = p;
  for (std::size_t i = 0; i < na; ++i)
    out(static_cast<Eigen::Index>(4 * nb + i)) = stable[i];
  return out;
}

Eigen::VectorXd LinearProblem::pack(const LinearModel &m) const {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(param_count()));
  const std::size_t nb = order_.nb;
  for (int c = 0; c < 4; ++c)
    for (std::size_t j = 0; j < m.g.num[c].size() && j < nb; ++j)
      p(static_cast<Eigen::Index>(c * nb + j)) = m.g.num[c][j];
  for (std::size_t i = 0; i < m.g.den.size() && i < order_.na; ++i)
    p(static_cast<Eigen::Index>(4 * nb + i)) = m.g.den[i];
  p(static_cast<Eigen::Index>(4 * nb + order_.na)) = m.offset;
  return p;
}

LinearModel LinearProblem::unpack(const Eigen::VectorXd &p) const {
  LinearModel m;
  const std::size_t nb = order_.nb, na = order_.na;
  for (int c = 0; c < 4; ++c) {
    m.g.num[c].assign(nb, 0.0);
    for (std::size_t j = 0; j < nb; ++j)
      m.g.num[c][j] = p(static_cast<Eigen::Index>(c * nb + j));
    m.g.delay[c] = order_.nk;
  }
  m.g.den.assign(na, 0.0);
  for (std::size_t i = 0; i < na; ++i)
    m.g.den[i] = p(static_cast<Eigen::Index>(4 * nb + i));
  m.offset = p(static_cast<Eigen::Index>(4 * nb + na));
  return m;
}

// --- HwProblem --------------------------------------------------------------

HwProblem::HwProblem(std::array<std::vector<double>, 4> u, std::vector<double> y,
                     std::array<std::vector<double>, 4> f1_x,
                     std::vector<double> f2_x, OrderSpec order,
                     bool warmup_excluded)
    : u_(std::move(u)), y_(std::move(y)), f1_x_(std::move(f1_x)),
      f2_x_(std::move(f2_x)), order_(order) {
  warmup_ = warmup_excluded ? std::max(order_.na, order_.nb + order_.nk) : 0;
  const std::size_t k = f2_x_.size();
  require(k >= 2, Fault::InvalidArgument, "need >= 2 breakpoints");
  for (int c = 0; c < 4; ++c)
    require(f1_x_[c].size() == k, Fault::InvalidArgument,
            "f1/f2 breakpoint counts differ");
  require(y_.size() > warmup_ + param_count(), Fault::InvalidArgument,
          "series too short for the requested breakpoint count");

  // The f1 x-grids are fixed, so each sample's interpolation stencil is a
  // constant of the problem.
  for (int c = 0; c < 4; ++c) {
    PwlFunction probe(f1_x_[c], std::vector<double>(k, 0.0));
    phi_[c].resize(u_[c].size());
    for (std::size_t i = 0; i < u_[c].size(); ++i) {
      const auto b = probe.basis(u_[c][i]);
      phi_[c][i] = {static_cast<std::uint32_t>(b.left), b.t};
    }
  }
}

std::array<std::vector<double>, 4> HwProblem::eval_f1(const Eigen::VectorXd &p) const {
  const std::size_t k = f2_x_.size();
  std::array<std::vector<double>, 4> v;
  for (int c = 0; c < 4; ++c) {
    const double *y1 = p.data() + static_cast<std::ptrdiff_t>(c * k);
    v[c].resize(u_[c].size());
    for (std::size_t i = 0; i < v[c].size(); ++i) {
      const Knot &kn = phi_[c][i];
      v[c][i] = (1.0 - kn.t) * y1[kn.left] + kn.t * y1[kn.left + 1];
    }
  }
  return v;
}

std::vector<double> HwProblem::lti_out(const Eigen::VectorXd &p,
                                       const std::array<std::vector<double>, 4> &v) const {
  const std::size_t k = f2_x_.size(), nb = order_.nb, na = order_.na;
  std::array<const double *, 4> num{};
  for (int c = 0; c < 4; ++c)
    num[c] = p.data() + static_cast<std::ptrdiff_t>(4 * k + c * nb);
  const double *den = p.data() + static_cast<std::ptrdiff_t>(4 * k + 4 * nb);
  return miso_filter(num, nb, order_.nk, den, na, v);
}

Eigen::VectorXd HwProblem::residual(const Eigen::VectorXd &p) const {
  const std::size_t k = f2_x_.size();
  const std::vector<double> w = lti_out(p, eval_f1(p));
  const double *y2 = p.data() +
                     static_cast<std::ptrdiff_t>(4 * k + 4 * order_.nb + order_.na);
  PwlFunction f2(f2_x_, std::vector<double>(y2, y2 + k));

  const std::size_t rows = y_.size() - warmup_;
  Eigen::VectorXd r(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t t = warmup_ + i;
    r(static_cast<Eigen::Index>(i)) = f2(w[t]) - y_[t];
  }
  return r;
}

Eigen::MatrixXd HwProblem::jacobian(const Eigen::VectorXd &p) const {
  const std::size_t k = f2_x_.size(), nb = order_.nb, na = order_.na,
                    nk = order_.nk;
  const std::size_t n = y_.size();
  const std::size_t rows = n - warmup_;

  const auto v = eval_f1(p);
  const std::vector<double> w = lti_out(p, v);
  const double *y2 = p.data() + static_cast<std::ptrdiff_t>(4 * k + 4 * nb + na);
  PwlFunction f2(f2_x_, std::vector<double>(y2, y2 + k));
  const double *den = p.data() + static_cast<std::ptrdiff_t>(4 * k + 4 * nb);
  const std::vector<double> den_vec(den, den + na);

  // Slope of f2 and its basis stencil at every retained sample.
  std::vector<double> d2(rows);
  std::vector<PwlFunction::Basis> f2_basis(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double wt = w[warmup_ + i];
    f2_basis[i] = f2.basis(wt);
    d2[i] = f2.slope_at(wt);
  }

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(param_count()));

  // f1 y-values: (B_c/A) applied to each fixed basis stream.
  std::vector<double> stream(n);
  for (int c = 0; c < 4; ++c) {
    const double *num_c = p.data() + static_cast<std::ptrdiff_t>(4 * k + c * nb);
    for (std::size_t j = 0; j < k; ++j) {
      std::fill(stream.begin(), stream.end(), 0.0);
      bool any = false;
      for (std::size_t i = 0; i < n; ++i) {
        const Knot &kn = phi_[c][i];
        if (kn.left == j) {
          stream[i] = 1.0 - kn.t;
          any = true;
        } else if (kn.left + 1 == j) {
          stream[i] = kn.t;
          any = true;
        }
      }
      const std::size_t col = c * k + j;
      if (!any)
        continue;
      const std::vector<double> filtered =
          filter_single(num_c, nb, nk, den, na, stream);
      for (std::size_t i = 0; i < rows; ++i)
        J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) =
            d2[i] * filtered[warmup_ + i];
    }
  }

  // Numerators: (1/A)(v_c delayed by nk), shifted per tap.
  for (int c = 0; c < 4; ++c) {
    std::vector<double> delayed(n, 0.0);
    for (std::size_t i = nk; i < n; ++i)
      delayed[i] = v[c][i - nk];
    const std::vector<double> base = filter_inverse_den(den_vec, delayed);
    for (std::size_t j = 0; j < nb; ++j) {
      const std::size_t col = 4 * k + c * nb + j;
      for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t t = warmup_ + i;
        J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) =
            t >= j ? d2[i] * base[t - j] : 0.0;
      }
    }
  }

  // Denominator: -(1/A)(w delayed by m+1).
  const std::vector<double> h = filter_inverse_den(den_vec, w);
  for (std::size_t m = 0; m < na; ++m) {
    const std::size_t col = 4 * k + 4 * nb + m;
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t t = warmup_ + i;
      J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) =
          t >= m + 1 ? -d2[i] * h[t - 1 - m] : 0.0;
    }
  }

  // f2 y-values enter linearly through the output interpolation stencil.
  for (std::size_t i = 0; i < rows; ++i) {
    const auto &b = f2_basis[i];
    const std::size_t col = 4 * k + 4 * nb + na;
    J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col + b.left)) +=
        1.0 - b.t;
    J(static_cast<Eigen::Index>(i),
      static_cast<Eigen::Index>(col + b.left + 1)) += b.t;
  }
  return J;
}

Eigen::VectorXd HwProblem::project(const Eigen::VectorXd &p) const {
  const std::size_t k = f2_x_.size(), nb = order_.nb, na = order_.na;
  if (na == 0)
    return p;
  std::vector<double> den(p.data() + static_cast<std::ptrdiff_t>(4 * k + 4 * nb),
                          p.data() + static_cast<std::ptrdiff_t>(4 * k + 4 * nb + na));
  const std::vector<double> stable = stabilize_denominator(den);
  Eigen::VectorXd out = p;
  for (std::size_t i = 0; i < na; ++i)
    out(static_cast<Eigen::Index>(4 * k + 4 * nb + i)) = stable[i];
  return out;
}

Eigen::VectorXd HwProblem::pack(const HwModel &m) const {
  const std::size_t k = f2_x_.size(), nb = order_.nb, na = order_.na;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(param_count()));
  for (int c = 0; c < 4; ++c)
    for (std::size_t j = 0; j < k; ++j)
      p(static_cast<Eigen::Index>(c * k + j)) = m.f1[c].ys()[j];
  for (int c = 0; c < 4; ++c)
    for (std::size_t j = 0; j < nb && j < m.g.num[c].size(); ++j)
      p(static_cast<Eigen::Index>(4 * k + c * nb + j)) = m.g.num[c][j];
  for (std::size_t i = 0; i < na && i < m.g.den.size(); ++i)
    p(static_cast<Eigen::Index>(4 * k + 4 * nb + i)) = m.g.den[i];
  for (std::size_t j = 0; j < k; ++j)
    p(static_cast<Eigen::Index>(4 * k + 4 * nb + na + j)) = m.f2.ys()[j];
  return p;
}

HwModel HwProblem::unpack(const Eigen::VectorXd &p) const {
  const std::size_t k = f2_x_.size(), nb = order_.nb, na = order_.na;
  auto pwl_ys = [&p](std::size_t offset, std::size_t count) {
    std::vector<double> ys(count);
    for (std::size_t j = 0; j < count; ++j)
      ys[j] = p(static_cast<Eigen::Index>(offset + j));
    return ys;
  };
  std::array<PwlFunction, 4> f1{
      PwlFunction(f1_x_[0], pwl_ys(0, k)), PwlFunction(f1_x_[1], pwl_ys(k, k)),
      PwlFunction(f1_x_[2], pwl_ys(2 * k, k)),
      PwlFunction(f1_x_[3], pwl_ys(3 * k, k))};
  LtiBlock g;
  for (int c = 0; c < 4; ++c) {
    g.num[c].assign(nb, 0.0);
    for (std::size_t j = 0; j < nb; ++j)
      g.num[c][j] = p(static_cast<Eigen::Index>(4 * k + c * nb + j));
    g.delay[c] = order_.nk;
  }
  g.den.assign(na, 0.0);
  for (std::size_t i = 0; i < na; ++i)
    g.den[i] = p(static_cast<Eigen::Index>(4 * k + 4 * nb + i));
  PwlFunction f2(f2_x_, pwl_ys(4 * k + 4 * nb + na, k));
  return HwModel{f1, g, f2, {}, {}};
}

Eigen::VectorXd HwProblem::init_from_linear(const LinearModel &lin) const {
  const std::size_t k = f2_x_.size(), nb = order_.nb, na = order_.na;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(param_count()));
  for (int c = 0; c < 4; ++c)
    for (std::size_t j = 0; j < k; ++j)
      p(static_cast<Eigen::Index>(c * k + j)) = f1_x_[c][j]; // identity
  for (int c = 0; c < 4; ++c)
    for (std::size_t j = 0; j < nb && j < lin.g.num[c].size(); ++j)
      p(static_cast<Eigen::Index>(4 * k + c * nb + j)) = lin.g.num[c][j];
  for (std::size_t i = 0; i < na && i < lin.g.den.size(); ++i)
    p(static_cast<Eigen::Index>(4 * k + 4 * nb + i)) = lin.g.den[i];
  for (std::size_t j = 0; j < k; ++j)
    p(static_cast<Eigen::Index>(4 * k + 4 * nb + na + j)) =
        f2_x_[j] + lin.offset; // y = x + offset
  return p;
}

// --- initialization and drivers ---------------------------------------------

LinearModel arx_initialize(const std::array<std::vector<double>, 4> &u,
                           const std::vector<double> &y, OrderSpec order) {
  const std::size_t nb = order.nb, na = order.na, nk = order.nk;
  const std::size_t n0 = std::max(na, nb + nk);
  const std::size_t n = y.size();
  const std::size_t cols = 4 * nb + na + 1;
  require(n > n0 + cols, Fault::InvalidArgument,
          "series too short for equation-error initialization");
  const std::size_t rows = n - n0;

  Eigen::MatrixXd reg(static_cast<Eigen::Index>(rows),
                      static_cast<Eigen::Index>(cols));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t t = n0 + i;
    Eigen::Index col = 0;
    for (int c = 0; c < 4; ++c)
      for (std::size_t j = 0; j < nb; ++j)
        reg(static_cast<Eigen::Index>(i), col++) = u[c][t - nk - j];
    for (std::size_t m = 0; m < na; ++m)
      reg(static_cast<Eigen::Index>(i), col++) = -y[t - 1 - m];
    reg(static_cast<Eigen::Index>(i), col++) = 1.0;
    rhs(static_cast<Eigen::Index>(i)) = y[t];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(reg);
  qr.setThreshold(1e-10);
  require(static_cast<std::size_t>(qr.rank()) == cols, Fault::RankDeficientRegressor,
          "equation-error regressor is rank deficient");
  const Eigen::VectorXd theta = qr.solve(rhs);

  LinearModel m;
  Eigen::Index col = 0;
  for (int c = 0; c < 4; ++c) {
    m.g.num[c].assign(nb, 0.0);
    for (std::size_t j = 0; j < nb; ++j)
      m.g.num[c][j] = theta(col++);
    m.g.delay[c] = nk;
  }
  m.g.den.assign(na, 0.0);
  for (std::size_t i = 0; i < na; ++i)
    m.g.den[i] = theta(col++);
  const double d = theta(col);
  m.g.den = stabilize_denominator(m.g.den);
  const double a1 =
      1.0 + std::accumulate(m.g.den.begin(), m.g.den.end(), 0.0);
  m.offset = std::abs(a1) > 1e-9 ? d / a1 : 0.0;
  return m;
}

namespace {

LmOptions lm_options(const IdentConfig &cfg) {
  LmOptions opts;
  opts.max_iters = cfg.max_iters;
  opts.tol_rel_cost = cfg.tol_rel_cost;
  return opts;
}

void check_ident_trial(const Trial &trial, const IdentConfig &cfg) {
  trial.validate();
  require(trial.size() > 0 &&
              static_cast<double>(trial.size()) / trial.rate_hz() >=
                  cfg.min_duration_s,
          Fault::InvalidArgument, "identification trial shorter than required");
}

IdentMeta make_meta(const Trial &trial, const IdentConfig &cfg, Component component,
                    std::size_t k) {
  IdentMeta meta;
  meta.dataset_hash = trial.content_hash();
  meta.breakpoints = k;
  meta.seed = cfg.seed;
  meta.side = to_string(trial.insole.side);
  meta.component = to_string(component);
  return meta;
}

struct HwCandidateContext {
  std::shared_ptr<HwProblem> problem;
  Eigen::VectorXd init;
  std::array<double, 5> y_ranges; // f1 x4 + f2 perturbation scales
};

HwCandidateContext make_hw_context(const Trial &trial, Component component,
                                   std::size_t k, OrderSpec order,
                                   const IdentConfig &cfg,
                                   const LinearModel &lin) {
  auto u = trial.delta_r();
  const auto &y = trial.grf_component(component);

  std::array<std::vector<double>, 4> f1_x;
  for (int c = 0; c < 4; ++c)
    f1_x[c] = quantile_knots(u[c], k);

  const std::vector<double> w = lti_apply(lin.g, u);
  const std::vector<double> f2_x = quantile_knots(w, k);

  HwCandidateContext ctx;
  ctx.problem = std::make_shared<HwProblem>(std::move(u), y, f1_x, f2_x, order,
                                            cfg.warmup_excluded);
  ctx.init = ctx.problem->init_from_linear(lin);
  for (int c = 0; c < 4; ++c)
    ctx.y_ranges[static_cast<std::size_t>(c)] =
        f1_x[c].back() - f1_x[c].front();
  ctx.y_ranges[4] = f2_x.back() - f2_x.front();
  for (double &r : ctx.y_ranges)
    if (!(r > 0.0))
      r = 1.0;
  return ctx;
}

Eigen::VectorXd perturb_init(const HwCandidateContext &ctx, std::size_t k,
                             const IdentConfig &cfg, std::size_t order_idx,
                             std::size_t start) {
  Eigen::VectorXd p = ctx.init;
  if (start == 0)
    return p;
  // Start 0 stays at the identity/linear init, which guarantees the nesting
  // property; later starts jitter the breakpoint heights.
  Rng rng(Rng::derive(cfg.seed, 0x10000 + k * 64 + order_idx, start));
  for (int c = 0; c < 4; ++c) {
    const double sigma = 0.1 * ctx.y_ranges[static_cast<std::size_t>(c)];
    for (std::size_t j = 0; j < k; ++j)
      p(static_cast<Eigen::Index>(c * k + j)) += rng.normal(0.0, sigma);
  }
  const auto y2_off = static_cast<std::size_t>(p.size()) - k;
  const double sigma2 = 0.1 * ctx.y_ranges[4];
  for (std::size_t j = 0; j < k; ++j)
    p(static_cast<Eigen::Index>(y2_off + j)) += rng.normal(0.0, sigma2);
  return p;
}

LmResult run_lm(const LinearProblem &problem, const Eigen::VectorXd &p0,
                const LmOptions &opts) {
  return levenberg_marquardt(
      [&problem](const Eigen::VectorXd &p) { return problem.residual(p); },
      [&problem](const Eigen::VectorXd &p) { return problem.jacobian(p); },
      [&problem](const Eigen::VectorXd &p) { return problem.project(p); }, p0,
      opts);
}

LmResult run_lm(const HwProblem &problem, const Eigen::VectorXd &p0,
                const LmOptions &opts) {
  return levenberg_marquardt(
      [&problem](const Eigen::VectorXd &p) { return problem.residual(p); },
      [&problem](const Eigen::VectorXd &p) { return problem.jacobian(p); },
      [&problem](const Eigen::VectorXd &p) { return problem.project(p); }, p0,
      opts);
}

} // namespace

IdentResult identify_linear(const Trial &ident, Component component,
                            const IdentConfig &cfg) {
  cfg.validate();
  check_ident_trial(ident, cfg);
  const OrderSpec order = cfg.orders.front();

  LinearProblem problem(ident.delta_r(), ident.grf_component(component), order,
                        cfg.warmup_excluded);
  const LinearModel init =
      arx_initialize(ident.delta_r(), ident.grf_component(component), order);
  const LmResult lm = run_lm(problem, problem.pack(init), lm_options(cfg));

  LinearModel model = problem.unpack(lm.params);
  model.meta = make_meta(ident, cfg, component, 0);

  IdentResult result{Model(model), {}, {}, lm.trace, 0, lm.cost, {}, {}};
  result.fit_ident =
      series_report(result.model, ident, component, cfg.warmup_excluded);
  result.candidates.push_back({0, 0, 0, problem.param_count(), lm.cost,
                               result.fit_ident.nrmse_fit_pct, 0.0});
  result.candidate_models.push_back(result.model);
  return result;
}

IdentResult identify_hw(const Trial &ident, Component component, std::size_t k,
                        const IdentConfig &cfg) {
  cfg.validate();
  require(std::find(cfg.breakpoint_grid.begin(), cfg.breakpoint_grid.end(), k) !=
              cfg.breakpoint_grid.end(),
          Fault::InvalidArgument, "k is not in the configured breakpoint grid");
  check_ident_trial(ident, cfg);
  const OrderSpec order = cfg.orders.front();

  const IdentResult linear = identify_linear(ident, component, cfg);
  const LinearModel &lin = std::get<LinearModel>(linear.model);
  const HwCandidateContext ctx = make_hw_context(ident, component, k, order, cfg, lin);

  bool have_best = false;
  LmResult best;
  std::size_t best_start = 0;
  std::exception_ptr first_error;
  for (std::size_t s = 0; s < cfg.multistarts; ++s) {
    try {
      LmResult lm = run_lm(*ctx.problem, perturb_init(ctx, k, cfg, 0, s),
                           lm_options(cfg));
      if (!have_best || lm.cost < best.cost) {
        best = std::move(lm);
        best_start = s;
        have_best = true;
      }
    } catch (const PipelineError &) {
      if (!first_error)
        first_error = std::current_exception();
    }
  }
  if (!have_best) {
    if (first_error)
      std::rethrow_exception(first_error);
    raise(Fault::DivergedOptimization, "all multistarts failed");
  }

  HwModel model = ctx.problem->unpack(best.params);
  normalize_hw(model, ident.delta_r());
  model.meta = make_meta(ident, cfg, component, k);

  IdentResult result{Model(model), {}, {}, best.trace, k, best.cost, {}, {}};
  result.fit_ident =
      series_report(result.model, ident, component, cfg.warmup_excluded);
  result.candidates.push_back({k, 0, best_start, ctx.problem->param_count(),
                               best.cost, result.fit_ident.nrmse_fit_pct, 0.0});
  result.candidate_models.push_back(result.model);
  return result;
}

IdentResult grid_search(const Trial &ident, const std::vector<const Trial *> &valid,
                        Component component, const IdentConfig &cfg) {
  cfg.validate();
  require(!valid.empty(), Fault::InvalidArgument,
          "grid search needs at least one validation trial");
  check_ident_trial(ident, cfg);
  for (const Trial *t : valid) {
    require(t != nullptr, Fault::InvalidArgument, "null validation trial");
    t->validate();
  }

  const auto u = ident.delta_r();
  const auto &y = ident.grf_component(component);
  const LmOptions opts = lm_options(cfg);

  struct LinearUnit {
    LmResult lm;
    LinearModel model;
    std::shared_ptr<LinearProblem> problem;
    std::exception_ptr error;
    bool done = false;
  };
  std::vector<LinearUnit> linear_units(cfg.orders.size());

  run_parallel(cfg.orders.size(), cfg.jobs, [&](std::size_t oi) {
    LinearUnit &unit = linear_units[oi];
    try {
      unit.problem = std::make_shared<LinearProblem>(u, y, cfg.orders[oi],
                                                     cfg.warmup_excluded);
      const LinearModel init = arx_initialize(u, y, cfg.orders[oi]);
      unit.lm = run_lm(*unit.problem, unit.problem->pack(init), opts);
      unit.model = unit.problem->unpack(unit.lm.params);
      unit.done = true;
    } catch (...) {
      unit.error = std::current_exception();
    }
  });

  // Hammerstein-Wiener work units: (order, k, start), all independent once
  // the linear initializations exist.
  struct HwUnit {
    std::size_t order_idx, k, start;
    LmResult lm;
    std::exception_ptr error;
    bool done = false;
  };
  std::vector<HwUnit> hw_units;
  std::map<std::pair<std::size_t, std::size_t>, HwCandidateContext> contexts;
  for (std::size_t oi = 0; oi < cfg.orders.size(); ++oi) {
    if (!linear_units[oi].done)
      continue;
    for (std::size_t k : cfg.breakpoint_grid) {
      try {
        contexts.emplace(std::make_pair(oi, k),
                         make_hw_context(ident, component, k, cfg.orders[oi],
                                         cfg, linear_units[oi].model));
      } catch (const PipelineError &) {
        continue; // degenerate channel for this k; candidate dropped
      }
      for (std::size_t s = 0; s < cfg.multistarts; ++s)
        hw_units.push_back({oi, k, s, {}, nullptr, false});
    }
  }

  run_parallel(hw_units.size(), cfg.jobs, [&](std::size_t i) {
    HwUnit &unit = hw_units[i];
    const HwCandidateContext &ctx = contexts.at({unit.order_idx, unit.k});
    try {
      unit.lm = run_lm(*ctx.problem,
                       perturb_init(ctx, unit.k, cfg, unit.order_idx, unit.start),
                       opts);
      unit.done = true;
    } catch (...) {
      unit.error = std::current_exception();
    }
  });

  // Deterministic reduction: candidates in (order, k) order, each taking its
  // lowest-cost start (ties -> lower start index).
  struct Candidate {
    Model model;
    CandidateFit fit;
    std::vector<double> trace;
  };
  std::vector<Candidate> candidates;

  auto valid_fit_mean = [&](const Model &m) {
    double acc = 0.0;
    for (const Trial *t : valid) {
      const auto est = model_simulate(m, t->delta_r());
      const std::size_t warmup = cfg.warmup_excluded ? model_warmup(m) : 0;
      acc += nrmse_of(t->grf_component(component), est, warmup);
    }
    return acc / static_cast<double>(valid.size());
  };

  for (std::size_t oi = 0; oi < cfg.orders.size(); ++oi) {
    if (!linear_units[oi].done)
      continue;
    LinearUnit &unit = linear_units[oi];
    LinearModel model = unit.model;
    model.meta = make_meta(ident, cfg, component, 0);
    Candidate cand{Model(model), {}, unit.lm.trace};
    cand.fit = {0,
                oi,
                0,
                unit.problem->param_count(),
                unit.lm.cost,
                nrmse_of(y, linear_simulate(model, u),
                         cfg.warmup_excluded ? model.warmup() : 0),
                valid_fit_mean(cand.model)};
    candidates.push_back(std::move(cand));
  }

  for (std::size_t oi = 0; oi < cfg.orders.size(); ++oi) {
    for (std::size_t k : cfg.breakpoint_grid) {
      const auto it = contexts.find({oi, k});
      if (it == contexts.end())
        continue;
      const HwUnit *best = nullptr;
      for (const HwUnit &unit : hw_units)
        if (unit.done && unit.order_idx == oi && unit.k == k &&
            (!best || unit.lm.cost < best->lm.cost))
          best = &unit;
      if (!best)
        continue;
      HwModel model = it->second.problem->unpack(best->lm.params);
      normalize_hw(model, u);
      model.meta = make_meta(ident, cfg, component, k);
      Candidate cand{Model(model), {}, best->lm.trace};
      const auto est = hw_simulate(model, u);
      cand.fit = {k,
                  oi,
                  best->start,
                  it->second.problem->param_count(),
                  best->lm.cost,
                  nrmse_of(y, est, cfg.warmup_excluded ? model.warmup() : 0),
                  valid_fit_mean(cand.model)};
      candidates.push_back(std::move(cand));
    }
  }

  if (candidates.empty()) {
    for (const auto &unit : linear_units)
      if (unit.error)
        std::rethrow_exception(unit.error);
    for (const auto &unit : hw_units)
      if (unit.error)
        std::rethrow_exception(unit.error);
    raise(Fault::DivergedOptimization, "no identification candidate succeeded");
  }

  // Highest mean validation fit wins; fits within the tie band prefer fewer
  // parameters, then the stable (linear, then ascending k) enumeration.
  std::size_t best_idx = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto &a = candidates[i].fit;
    const auto &b = candidates[best_idx].fit;
    if (a.fit_valid_mean > b.fit_valid_mean + cfg.tie_tol_fit_pct ||
        (a.fit_valid_mean >= b.fit_valid_mean - cfg.tie_tol_fit_pct &&
         a.param_count < b.param_count))
      best_idx = i;
  }

  const Candidate &winner = candidates[best_idx];
  IdentResult result{winner.model,   {},          {}, winner.trace,
                     winner.fit.k,   winner.fit.cost, {},
                     {}};
  result.fit_ident =
      series_report(result.model, ident, component, cfg.warmup_excluded);
  for (const Trial *t : valid)
    result.fit_valid.push_back(
        series_report(result.model, *t, component, cfg.warmup_excluded));
  for (auto &cand : candidates) {
    result.candidates.push_back(cand.fit);
    result.candidate_models.push_back(std::move(cand.model));
  }
  return result;
}

} // namespace insole
