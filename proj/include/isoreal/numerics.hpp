#pragma once

#include "isoreal/types.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace isoreal::numerics {

struct RootOptions {
  double x_tol = 1e-15;
  double f_tol = 0.0;
  int max_iter = 200;
};

/// Safeguarded Newton on a sign-changing bracket [lo, hi]. Falls back to a
/// bisection step whenever the Newton iterate leaves the current bracket or
/// fails to halve it. `fdf` returns (f(x), f'(x)).
inline double bracketed_newton(const std::function<std::pair<double, double>(double)>& fdf,
                               double lo, double hi, const RootOptions& opt = {}) {
  double flo = fdf(lo).first;
  double fhi = fdf(hi).first;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw ConvergenceError("bracketed_newton: no sign change on bracket");
  if (flo > 0) {
    std::swap(lo, hi);
  }
  // invariant: f(lo) < 0 < f(hi), lo and hi may be in either order
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < opt.max_iter; ++it) {
    const auto [f, df] = fdf(x);
    if (f == 0.0 || std::abs(f) <= opt.f_tol) return x;
    if (f < 0) lo = x; else hi = x;
    const double scale = std::max(1.0, std::abs(x));
    if (std::abs(hi - lo) <= opt.x_tol * scale) return x;
    const double a = std::min(lo, hi), b = std::max(lo, hi);
    double next = df != 0.0 ? x - f / df : a;
    if (!(next > a && next < b)) next = 0.5 * (lo + hi);
    // a few ulps is the best a noisy f allows
    const double stall = std::max(0.5 * opt.x_tol * scale, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x));
    if (std::abs(next - x) <= stall) return next;
    x = next;
  }
  return x;
}

/// Plain bisection on a sign-changing bracket.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                     int max_iter = 300) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  for (int it = 0; it < max_iter && std::abs(hi - lo) > x_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Adaptive Gauss-Kronrod (7/15) quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13, unsigned max_depth = 12) {
  if (a == b) return 0.0;
  // Boost compares an error estimate taken on [-1, 1] against a tolerance
  // scaled by the interval, so short intervals would recurse to max_depth.
  // Integrating on [-1, 1] directly keeps the two consistent.
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double err = 0.0;
  const auto g = [&](double x) { return f(mid + half * x); };
  return half * boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, -1.0, 1.0, max_depth,
                                                                             tol, &err);
}

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y ~ a + b x. R^2 is 1 for an exact fit and 0
/// when y has no variance.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  LinearFit fit;
  if (n < 2) return fit;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy > 0.0) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (fit.intercept + fit.slope * x[i]);
      ssr += r * r;
    }
    fit.r_squared = 1.0 - ssr / syy;
  }
  return fit;
}

}  // namespace isoreal::numerics
