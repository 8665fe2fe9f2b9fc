#pragma once

#include "isoreal/flow.hpp"
#include "isoreal/parallel.hpp"
#include "isoreal/potential.hpp"
#include "isoreal/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace isoreal::rectify {

struct NonvanishingCheck {
  double min_grad = std::numeric_limits<double>::infinity();
  Vec<2> at = Vec<2>::Zero();
  bool pass = false;
};

/// min |grad u| over the grid nodes; passes when it is at least `floor`.
inline NonvanishingCheck check_nonvanishing(const Potential<2>& u, const GridSpec<2>& grid,
                                            double floor = 1e-6) {
  NonvanishingCheck c;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec<2> x = grid.node(i);
    const double g = u.gradient(x).norm();
    if (g < c.min_grad) {
      c.min_grad = g;
      c.at = x;
    }
  }
  c.pass = c.min_grad >= floor;
  return c;
}

struct TauOptions {
  /// The integration box extends the grid box by this fraction per side.
  double padding = 0.2;
  flow::Tolerances tol{};
  double grad_floor = 1e-12;
  double max_time = 1e6;
  double level_tol = 1e-10;
  unsigned workers = 1;
};

/// Hitting times to {u = 0} and sigma = exp(int_0^tau lap u) at every node.
struct TauField {
  GridSpec<2> grid;
  Box<2> padded;
  std::vector<double> tau;
  std::vector<double> w;
  std::vector<double> sigma;
  std::vector<std::uint8_t> ok;
  std::size_t unreachable = 0;

  bool complete() const { return unreachable == 0; }
};

inline Box<2> padded_box(const Potential<2>& u, const Box<2>& b, double padding) {
  Box<2> p = b;
  const Box<2> dom = u.domain();
  for (int i = 0; i < 2; ++i) {
    const double ext = padding * (b.hi[i] - b.lo[i]);
    p.lo[i] = std::max(b.lo[i] - ext, dom.lo[i]);
    p.hi[i] = std::min(b.hi[i] + ext, dom.hi[i]);
  }
  return p;
}

namespace detail {

inline flow::Stops<2> stops_for(const Box<2>& box, const TauOptions& opt) {
  flow::Stops<2> s;
  s.box = box;
  s.grad_floor = opt.grad_floor;
  s.max_time = opt.max_time;
  return s;
}

inline std::optional<flow::HittingResult<2>> hit(const Potential<2>& u, const Vec<2>& x, const Box<2>& box,
                                                 const TauOptions& opt) {
  try {
    const auto h = flow::hitting_time(u, x, 0.0, stops_for(box, opt), opt.tol);
    if (h.hit() && std::abs(h.level_residual) <= opt.level_tol) return h;
  } catch (const DomainError&) {
  }
  return std::nullopt;
}

}  // namespace detail

/// Requires check_nonvanishing to pass; unreachable nodes are tagged.
inline TauField tau_field(const Potential<2>& u, const GridSpec<2>& grid, const TauOptions& opt = {}) {
  if (const auto c = check_nonvanishing(u, grid); !c.pass)
    throw InputError("grad u vanishes on the grid (min |grad u| = " + std::to_string(c.min_grad) + ")");
  TauField f;
  f.grid = grid;
  f.padded = padded_box(u, grid.box, opt.padding);
  const std::size_t n = grid.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  f.tau.assign(n, nan);
  f.w.assign(n, nan);
  f.sigma.assign(n, nan);
  f.ok.assign(n, 0);
  parallel_for(n, opt.workers, [&](std::size_t i) {
    const auto h = detail::hit(u, grid.node(i), f.padded, opt);
    if (!h) return;
    f.tau[i] = h->tau;
    f.w[i] = h->w;
    f.sigma[i] = std::exp(h->w);
    f.ok[i] = 1;
  });
  f.unreachable = static_cast<std::size_t>(std::count(f.ok.begin(), f.ok.end(), 0));
  return f;
}

struct CocycleCheck {
  double max_error = 0.0;
  int samples = 0;
};

/// max |tau(X(t, x)) - (tau(x) - t)| over random x in the grid box and
/// t in [-t_max, t_max], skipping draws whose flow leaves the padded box.
inline CocycleCheck check_cocycle(const Potential<2>& u, const TauField& f, int samples = 20,
                                  std::uint64_t seed = 1, double t_max = 0.5, const TauOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(f.grid.box.lo[0], f.grid.box.hi[0]);
  std::uniform_real_distribution<double> uy(f.grid.box.lo[1], f.grid.box.hi[1]);
  std::uniform_real_distribution<double> ut(-t_max, t_max);
  CocycleCheck c;
  for (int attempt = 0; c.samples < samples && attempt < 20 * samples; ++attempt) {
    const Vec<2> x(ux(rng), uy(rng));
    const double t = ut(rng);
    auto stops = detail::stops_for(f.padded, opt);
    stops.max_time = std::abs(t);
    auto tol = opt.tol;
    tol.record = false;
    const auto traj =
        flow::integrate(u, x, t >= 0 ? flow::Direction::Forward : flow::Direction::Backward, stops, tol);
    if (!std::holds_alternative<flow::MaxTime>(traj.termination)) continue;
    const auto a = detail::hit(u, x, f.padded, opt);
    const auto b = detail::hit(u, traj.back().x, f.padded, opt);
    if (!a || !b) continue;
    c.max_error = std::max(c.max_error, std::abs(b->tau - (a->tau - t)));
    ++c.samples;
  }
  return c;
}

struct StreamFunction {
  GridSpec<2> grid;
  std::vector<double> v;
  /// Point where v = 0.
  Vec<2> base = Vec<2>::Zero();
  /// Largest |flux through a closed rectangle| over the sampled loops.
  double circulation_max = 0.0;
  int loops = 0;
};

namespace detail {

// Cumulative integral of nodal values f on a uniform line with spacing h,
// each interval by the cubic through four neighbouring nodes.
inline std::vector<double> cumulative(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double seg;
    if (n < 4) {
      seg = 0.5 * h * (f[i] + f[i + 1]);
    } else if (i == 0) {
      seg = h / 24 * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]);
    } else if (i + 2 == n) {
      seg = h / 24 * (9 * f[i + 1] + 19 * f[i] - 5 * f[i - 1] + f[i - 2]);
    } else {
      seg = h / 24 * (-f[i - 1] + 13 * f[i] + 13 * f[i + 1] - f[i + 2]);
    }
    c[i + 1] = c[i] + seg;
  }
  return c;
}

// Integral between nodes a and b (either order) of a row or column.
inline double line_integral(const std::vector<double>& f, double h, int a, int b) {
  const auto c = cumulative(f, h);
  return c[b] - c[a];
}

inline double bilinear(const GridSpec<2>& g, const std::vector<double>& f, const Vec<2>& x) {
  double s[2];
  int k[2];
  for (int a = 0; a < 2; ++a) {
    const double q = (x[a] - g.box.lo[a]) / g.spacing(a);
    k[a] = std::clamp(static_cast<int>(std::floor(q)), 0, g.n[a] - 2);
    s[a] = q - k[a];
  }
  auto at = [&](int i, int j) { return f[g.index({k[0] + i, k[1] + j})]; };
  return (1 - s[0]) * (1 - s[1]) * at(0, 0) + s[0] * (1 - s[1]) * at(1, 0) + (1 - s[0]) * s[1] * at(0, 1) +
         s[0] * s[1] * at(1, 1);
}

}  // namespace detail

/// v with sigma grad u = grad-perp v = (-v_y, v_x): v_x = sigma u_y along
/// the bottom row, then v_y = -sigma u_x up each column. v vanishes at the
/// origin when it lies in the box, otherwise at the lower-left corner.
/// Path independence is checked on `loops` random grid rectangles.
inline StreamFunction stream_v(const Potential<2>& u, const TauField& f, int loops = 20,
                               std::uint64_t seed = 1) {
  if (!f.complete())
    throw InputError("stream function needs sigma at every node (" + std::to_string(f.unreachable) +
                     " unreachable nodes)");
  const auto& g = f.grid;
  const int nx = g.n[0], ny = g.n[1];
  const double hx = g.spacing(0), hy = g.spacing(1);
  // flux components on the nodes
  std::vector<double> fx(g.size()), fy(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec<2> gu = u.gradient(g.node(i));
    fx[i] = f.sigma[i] * gu[1];
    fy[i] = -f.sigma[i] * gu[0];
  }
  auto row = [&](const std::vector<double>& a, int j) {
    std::vector<double> r(nx);
    for (int i = 0; i < nx; ++i) r[i] = a[g.index({i, j})];
    return r;
  };
  auto col = [&](const std::vector<double>& a, int i) {
    std::vector<double> c(ny);
    for (int j = 0; j < ny; ++j) c[j] = a[g.index({i, j})];
    return c;
  };

  StreamFunction s;
  s.grid = g;
  s.v.assign(g.size(), 0.0);
  const auto bottom = detail::cumulative(row(fx, 0), hx);
  for (int i = 0; i < nx; ++i) {
    const auto up = detail::cumulative(col(fy, i), hy);
    for (int j = 0; j < ny; ++j) s.v[g.index({i, j})] = bottom[i] + up[j];
  }
  s.base = g.box.lo;
  if (g.box.contains(Vec<2>::Zero())) {
    s.base = Vec<2>::Zero();
    const double v0 = detail::bilinear(g, s.v, s.base);
    for (double& v : s.v) v -= v0;
  }

  // flux out of a rectangle of grid lines; zero when div(sigma grad u) = 0
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> di(0, nx - 1), dj(0, ny - 1);
  for (int k = 0; k < loops; ++k) {
    int i0 = di(rng), i1 = di(rng), j0 = dj(rng), j1 = dj(rng);
    if (i0 == i1) i1 = i0 == 0 ? nx - 1 : 0;
    if (j0 == j1) j1 = j0 == 0 ? ny - 1 : 0;
    // v(i1, j1) along x then y, against y then x
    const double a = detail::line_integral(row(fx, j0), hx, i0, i1) + detail::line_integral(col(fy, i1), hy, j0, j1);
    const double b = detail::line_integral(col(fy, i0), hy, j0, j1) + detail::line_integral(row(fx, j1), hx, i0, i1);
    s.circulation_max = std::max(s.circulation_max, std::abs(a - b));
    ++s.loops;
  }
  return s;
}

struct RectificationMap {
  GridSpec<2> grid;
  std::vector<double> tau;
  std::vector<double> v;
  /// Rows grad(-tau) and grad v by centered differences; NaN on the boundary.
  std::vector<Mat<2>> jacobian;
  /// Over interior nodes: max |grad Phi grad u - e1|, its two components and min |det grad Phi|.
  double max_dev_e1 = 0.0;
  double max_dev_tau = 0.0;
  double max_dev_v = 0.0;
  double min_abs_det = std::numeric_limits<double>::infinity();
  double min_grad_v = std::numeric_limits<double>::infinity();
  std::size_t interior = 0;
};

/// Phi = (-tau, v) and its Jacobian identities.
inline RectificationMap build_phi_and_verify(const TauField& tf, const StreamFunction& sf, const Potential<2>& u) {
  const auto& g = tf.grid;
  if (g.n != sf.grid.n || g.box.lo != sf.grid.box.lo || g.box.hi != sf.grid.box.hi)
    throw InputError("tau and v grids do not match");
  RectificationMap m;
  m.grid = g;
  m.tau = tf.tau;
  m.v = sf.v;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Mat<2> blank;
  blank.setConstant(nan);
  m.jacobian.assign(g.size(), blank);
  const double hx = g.spacing(0), hy = g.spacing(1);
  for (int j = 1; j + 1 < g.n[1]; ++j) {
    for (int i = 1; i + 1 < g.n[0]; ++i) {
      const std::size_t idx = g.index({i, j});
      const std::size_t e = g.index({i + 1, j}), w = g.index({i - 1, j});
      const std::size_t n = g.index({i, j + 1}), s = g.index({i, j - 1});
      if (!tf.ok[idx] || !tf.ok[e] || !tf.ok[w] || !tf.ok[n] || !tf.ok[s]) continue;
      Mat<2> J;
      J(0, 0) = -(m.tau[e] - m.tau[w]) / (2 * hx);
      J(0, 1) = -(m.tau[n] - m.tau[s]) / (2 * hy);
      J(1, 0) = (m.v[e] - m.v[w]) / (2 * hx);
      J(1, 1) = (m.v[n] - m.v[s]) / (2 * hy);
      m.jacobian[idx] = J;
      const Vec<2> r = J * u.gradient(g.node(idx)) - Vec<2>(1.0, 0.0);
      m.max_dev_e1 = std::max(m.max_dev_e1, r.norm());
      m.max_dev_tau = std::max(m.max_dev_tau, std::abs(r[0]));
      m.max_dev_v = std::max(m.max_dev_v, std::abs(r[1]));
      m.min_abs_det = std::min(m.min_abs_det, std::abs(J.determinant()));
      m.min_grad_v = std::min(m.min_grad_v, J.row(1).norm());
      ++m.interior;
    }
  }
  return m;
}

struct FlowRectification {
  /// max over samples of |(Phi(X(t + dt)) - Phi(X(t))) / dt - e1| (component-wise).
  double max_error = 0.0;
  int trajectories = 0;
};

/// Y(t) = Phi(X(t, x)) along random trajectories from the middle of the box,
/// with Phi interpolated bilinearly from the grid.
inline FlowRectification check_flow_rectification(const Potential<2>& u, const RectificationMap& m,
                                                  int trajectories = 10, std::uint64_t seed = 1,
                                                  double dt = 0.05, int steps = 10) {
  const auto& g = m.grid;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.8 * g.box.lo[0] + 0.2 * g.box.hi[0], 0.2 * g.box.lo[0] + 0.8 * g.box.hi[0]);
  std::uniform_real_distribution<double> uy(0.8 * g.box.lo[1] + 0.2 * g.box.hi[1], 0.2 * g.box.lo[1] + 0.8 * g.box.hi[1]);
  FlowRectification r;
  flow::Stops<2> stops;
  stops.box = g.box;
  stops.max_time = dt;
  flow::Tolerances tol;
  tol.record = false;
  auto phi = [&](const Vec<2>& x) {
    return Vec<2>(-detail::bilinear(g, m.tau, x), detail::bilinear(g, m.v, x));
  };
  for (int k = 0; k < trajectories; ++k) {
    Vec<2> x(ux(rng), uy(rng));
    Vec<2> y = phi(x);
    for (int s = 0; s < steps; ++s) {
      const auto traj = flow::integrate(u, x, flow::Direction::Forward, stops, tol);
      if (!std::holds_alternative<flow::MaxTime>(traj.termination)) break;
      x = traj.back().x;
      const Vec<2> y1 = phi(x);
      const Vec<2> d = (y1 - y) / dt - Vec<2>(1.0, 0.0);
      r.max_error = std::max(r.max_error, d.cwiseAbs().maxCoeff());
      y = y1;
    }
    ++r.trajectories;
  }
  return r;
}

}  // namespace isoreal::rectify
