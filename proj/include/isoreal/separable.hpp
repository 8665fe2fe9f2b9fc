#pragma once

#include "isoreal/conductivity.hpp"
#include "isoreal/numerics.hpp"
#include "isoreal/potential.hpp"
#include "isoreal/probes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace isoreal::separable {

/// One half-axis of a component, r > 0 standing for x = sign * r. Along the
/// flow r' = phi'(r) with phi(r) = f(sign * r).
class HalfAxis {
 public:
  HalfAxis(const Component1D& c, double sign, double r_max)
      : c_(&c), sign_(sign), r_max_(r_max), base_(0.5 * r_max), f_hi_(Fs(std::log(r_max))) {}

  double phi(double r) const { return c_->f(sign_ * r); }
  double dphi(double r) const { return sign_ * c_->df(sign_ * r); }
  double r_max() const { return r_max_; }

  /// F(r) = int_base^r dt / phi'(t), computed in s = ln t so the 1/t
  /// behaviour near 0 becomes a bounded integrand.
  double F(double r) const { return Fs(std::log(r)); }

  double Fs(double s) const {
    return numerics::integrate([this](double v) { return dFs(v); }, std::log(base_), s, 1e-14);
  }

  double dFs(double s) const {
    const double t = std::exp(s);
    return t / dphi(t);
  }

  /// r with F(r) = v. Saturates at r_max when v lies beyond F(r_max).
  double F_inverse(double v) const {
    const double s_hi = std::log(r_max_);
    const double f_hi = f_hi_;
    const bool increasing = dphi(base_) > 0.0;
    // each evaluation integrates from the nearest already-known point; F at
    // s_hi may be inaccurate (phi' can vanish there) so it is never reused
    std::vector<std::pair<double, double>> known{{std::log(base_), 0.0}};
    auto eval = [&](double s) {
      auto near = known.front();
      for (const auto& k : known)
        if (std::abs(k.first - s) < std::abs(near.first - s)) near = k;
      const double f =
          near.second + numerics::integrate([this](double q) { return dFs(q); }, near.first, s, 1e-14);
      known.emplace_back(s, f);
      return f;
    };
    auto g = [&](double s) {
      if (s == s_hi) return std::pair{f_hi - v, dFs(s)};
      return std::pair{eval(s) - v, dFs(s)};
    };
    if (increasing ? v >= f_hi : v <= f_hi) return r_max_;
    // F is monotone and unbounded as r -> 0 (like ln r / phi''(0))
    double s_lo = s_hi - 1.0;
    while ((eval(s_lo) - v > 0) == increasing) {
      s_lo = s_hi - 2.0 * (s_hi - s_lo);
      if (s_lo < -700.0) throw ConvergenceError("F_inverse: level below representable range");
    }
    numerics::RootOptions opt;
    opt.x_tol = 1e-16;
    return std::exp(numerics::bracketed_newton(g, s_lo, s_hi, opt));
  }

 private:
  const Component1D* c_;
  double sign_;
  double r_max_;
  double base_;
  double f_hi_;
};

struct OracleResult {
  double tau = 0.0;
  /// Hitting point (a, b) on {f(a) + g(b) = 0}.
  double a = 0.0;
  double b = 0.0;
  double w = 0.0;
};

/// Closed-form w for u = f(x) + g(y) at level 0, independent of the ODE
/// integrator: the axis flows are x(t) = F^{-1}(F(x) + t), y(t) = G^{-1}(G(y) + t)
/// with F, G by quadrature, tau solves f(x(tau)) + g(y(tau)) = 0, and
/// w = ln |f'(a) g'(b) / (f'(x) g'(y))|. Requires f(0) = g(0) = 0, points off
/// the axes, and f', g' of opposite, constant signs on the quadrant.
inline OracleResult separable_w_oracle(const Component1D& f, const Component1D& g, double x, double y,
                                       const Box<2>& box) {
  if (x == 0.0 || y == 0.0) throw InputError("separable_w_oracle: point lies on an axis (manifold)");
  const double sx = x > 0 ? 1.0 : -1.0, sy = y > 0 ? 1.0 : -1.0;
  const HalfAxis ax(f, sx, sx > 0 ? box.hi[0] : -box.lo[0]);
  const HalfAxis ay(g, sy, sy > 0 ? box.hi[1] : -box.lo[1]);
  const double rx = std::abs(x), ry = std::abs(y);
  if ((ax.dphi(rx) > 0) == (ay.dphi(ry) > 0) || ax.dphi(rx) == 0.0 || ay.dphi(ry) == 0.0)
    throw InputError("separable_w_oracle: point is not in a saddle quadrant");

  const double Fx = ax.F(rx), Gy = ay.F(ry);
  auto ends = [&](double tau) {
    return std::pair{ax.F_inverse(Fx + tau), ay.F_inverse(Gy + tau)};
  };
  auto h = [&](double tau) {
    const auto [ra, rb] = ends(tau);
    const double da = ax.dphi(ra), db = ay.dphi(rb);
    return std::pair{ax.phi(ra) + ay.phi(rb), da * da + db * db};
  };

  OracleResult out;
  const double h0 = ax.phi(rx) + ay.phi(ry);
  if (h0 != 0.0) {
    // u increases along the flow: search forward from below the level, backward from above
    const double dir = h0 < 0 ? 1.0 : -1.0;
    double far = dir;
    while ((h(far).first < 0) == (h0 < 0)) {
      far *= 2.0;
      if (std::abs(far) > 1e12) throw ConvergenceError("separable_w_oracle: level not reached");
    }
    numerics::RootOptions opt;
    opt.x_tol = 1e-15;
    out.tau = numerics::bracketed_newton(h, 0.0, far, opt);
  }
  const auto [ra, rb] = ends(out.tau);
  out.a = sx * ra;
  out.b = sy * rb;
  out.w = std::log(std::abs(f.df(out.a) * g.df(out.b) / (f.df(x) * g.df(y))));
  return out;
}

struct BouFGOptions {
  int k_min = 4;
  int k_max = 40;
  /// Side of the axis probed (+1 or -1).
  double sign = 1.0;
  double r_max = 1.0;
  probes::DivergenceRule rule{};
};

/// Probe of F(x) - ln|x| / f''(0) near 0 on x = 2^-k. The stage value is the
/// variation |D(x_k) - D(x_kmin)|, which does not depend on the base point
/// of F; `raw` holds D itself.
struct BouFGReport {
  probes::ProbeReport report;
  std::vector<double> raw;
  bool bounded = false;
  double sup_estimate = 0.0;
};

inline BouFGReport check_bouFG(const Component1D& c, const BouFGOptions& opt = {}) {
  const double f2 = c.d2f(0.0);
  if (f2 == 0.0) throw InputError("check_bouFG: f''(0) = 0");
  const HalfAxis ax(c, opt.sign, opt.r_max);
  BouFGReport out;
  auto& r = out.report;
  r.kind = probes::ProbeKind::BouFG;
  r.parameter_name = "x";
  double first = 0.0;
  for (int k = opt.k_min; k <= opt.k_max; ++k) {
    const double x = std::ldexp(1.0, -k);
    const double d = ax.F(x) - std::log(x) / f2;
    if (k == opt.k_min) first = d;
    out.raw.push_back(d);
    out.sup_estimate = std::max(out.sup_estimate, std::abs(d));
    r.stages.push_back({x, std::abs(d - first), 1});
  }
  probes::decide(r, probes::distance_models(), opt.rule);
  out.bounded = r.verdict == probes::Verdict::Bounded;
  return out;
}

/// Zeros of c.df in one period [0, P): declared ones when present, otherwise
/// sign changes on a fine sample refined by bisection plus touching zeros
/// (local minima of |f'| below tol).
inline std::vector<double> derivative_zeros(const Component1D& c, int samples = 4096,
                                            double tol = 1e-12) {
  if (!c.period) throw InputError("component '" + c.name + "' is not periodic");
  if (c.derivative_zeros) return *c.derivative_zeros;
  const double p = *c.period;
  std::vector<double> z;
  std::vector<double> v(samples + 1);
  double scale = 0.0;
  for (int i = 0; i <= samples; ++i) {
    v[i] = c.df(p * i / samples);
    scale = std::max(scale, std::abs(v[i]));
  }
  auto push = [&](double t) {
    t = std::fmod(t, p);
    if (t < 0) t += p;
    for (double q : z)
      if (std::abs(q - t) < 1e-9 * p || std::abs(std::abs(q - t) - p) < 1e-9 * p) return;
    z.push_back(t);
  };
  for (int i = 0; i < samples; ++i) {
    const double a = p * i / samples, b = p * (i + 1) / samples;
    if (v[i] == 0.0) {
      push(a);
    } else if ((v[i] > 0) != (v[i + 1] > 0) && v[i + 1] != 0.0) {
      push(numerics::bisect(c.df, a, b, 1e-15 * p));
    } else if (i > 0 && std::abs(v[i]) <= std::abs(v[i - 1]) && std::abs(v[i]) <= std::abs(v[i + 1])) {
      // touching zero: minimize |f'| by golden-section on the neighbouring cells
      double lo = p * (i - 1) / samples, hi = b;
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int it = 0; it < 100; ++it) {
        const double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
        if (std::abs(c.df(m1)) < std::abs(c.df(m2))) hi = m2;
        else lo = m1;
      }
      const double t = 0.5 * (lo + hi);
      if (std::abs(c.df(t)) <= tol * std::max(1.0, scale)) push(t);
    }
  }
  std::sort(z.begin(), z.end());
  return z;
}

template <int D>
struct TorusVerdict {
  std::array<std::vector<double>, D> zeros;
  std::array<bool, D> declared{};
  /// Every axis has a zero of u_i' (trajectories stay bounded).
  bool trajectories_bounded = false;
  /// No axis has a zero, i.e. prod u_i' never vanishes.
  bool product_nonvanishing = false;
  bool realizable = false;
  /// sigma = 1 / |prod u_i'| on the unit cell, with its divergence check.
  std::optional<conductivity::ConductivityField<D>> sigma;
  std::optional<conductivity::DivergenceReport<D>> divergence;
  std::optional<conductivity::OrderEstimate> order;
};

template <int D>
std::function<double(const Vec<D>&)> torus_sigma(const std::array<Component1D, D>& comps) {
  return [comps](const Vec<D>& x) {
    double p = 1.0;
    for (int i = 0; i < D; ++i) p *= comps[i].df(x[i]);
    return 1.0 / std::abs(p);
  };
}

struct TorusOptions {
  /// Nodes per axis of the sigma sample on one period cell.
  int nodes = 65;
};

/// Realizability of a periodic separable gradient by the zero sets of u_i'.
template <int D>
TorusVerdict<D> analyze_separable_torus(const std::array<Component1D, D>& comps,
                                        const TorusOptions& opt = {}) {
  TorusVerdict<D> v;
  v.trajectories_bounded = true;
  v.product_nonvanishing = true;
  Box<D> cell;
  for (int i = 0; i < D; ++i) {
    v.declared[i] = comps[i].derivative_zeros.has_value();
    v.zeros[i] = derivative_zeros(comps[i]);
    if (v.zeros[i].empty()) v.trajectories_bounded = false;
    else v.product_nonvanishing = false;
    cell.lo[i] = 0.0;
    cell.hi[i] = *comps[i].period;
  }
  v.realizable = v.product_nonvanishing;
  if (v.realizable) {
    const auto u = make_separable<D>(comps, cell);
    std::array<int, D> n{};
    n.fill(opt.nodes);
    const GridSpec<D> grid(cell, n);
    const auto sigma = torus_sigma<D>(comps);
    v.sigma = conductivity::field_from_function<D>(grid, sigma, u.id());
    v.divergence = conductivity::divergence_residual(u, *v.sigma);
    const auto fine = conductivity::field_from_function<D>(grid.refined(), sigma, u.id());
    v.order = conductivity::residual_order(*v.divergence, conductivity::divergence_residual(u, fine));
  }
  return v;
}

}  // namespace isoreal::separable
