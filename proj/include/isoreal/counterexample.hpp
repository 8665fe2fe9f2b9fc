#pragma once

// Separable saddle u(x, y) = f(x) - y^2/2 on [-1, 1]^2 whose f is defined
// through the implicit relation x = exp(F(x) + ln^2|F(x)|), F(1) = beta,
// and f(x) = int_0^x dt / F'(t). The saddle at the origin has a vanishing
// Laplacian, yet the hitting-time exponent w is unbounded near the stable
// manifold {x = 0}.

#include "isoreal/numerics.hpp"
#include "isoreal/potential.hpp"
#include "isoreal/types.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <limits>

namespace isoreal::counterexample {

/// phi(t) = t + ln^2|t|, increasing on t < 0.
inline double phi(double t) {
  const double l = std::log(std::abs(t));
  return t + l * l;
}

inline double dphi(double t) { return 1.0 + 2.0 * std::log(std::abs(t)) / t; }

inline double d2phi(double t) { return 2.0 * (1.0 - std::log(std::abs(t))) / (t * t); }

/// beta = F(1), the negative root of phi(beta) = 0.
inline double beta() {
  static const double b = numerics::bracketed_newton(
      [](double t) { return std::pair{phi(t), dphi(t)}; }, -0.9, -0.1, {1e-16, 0.0, 200});
  return b;
}

/// F(x) for x in (0, 1]; the unique t <= beta with phi(t) = ln x.
inline double F(double x) {
  if (!(x > 0.0 && x <= 1.0))
    throw DomainError("counterexample F is defined on (0, 1], got " + std::to_string(x));
  const double target = std::log(x);
  const double hi = beta();
  if (x == 1.0) return hi;
  // phi(t) >= t, so t = target lies above the root; step down until bracketed
  double lo = target - 1.0;
  while (phi(lo) > target) lo = 2.0 * lo - 1.0;
  return numerics::bracketed_newton([&](double t) { return std::pair{phi(t) - target, dphi(t)}; },
                                    lo, hi, {1e-16, 0.0, 200});
}

/// f'(x) = 1 / F'(x) = x phi'(F(x)), odd extension.
inline double fprime(double x) {
  if (x == 0.0) return 0.0;
  const double a = std::abs(x);
  if (a > 1.0) throw DomainError("counterexample f is defined on [-1, 1]");
  const double v = a * dphi(F(a));
  return x > 0 ? v : -v;
}

/// f''(x) = phi'(F) + phi''(F) / phi'(F), even extension; f''(0) = 1.
inline double fsecond(double x) {
  if (x == 0.0) return 1.0;
  const double a = std::abs(x);
  if (a > 1.0) throw DomainError("counterexample f is defined on [-1, 1]");
  const double t = F(a);
  const double d = dphi(t);
  return d + d2phi(t) / d;
}

/// f(x) = int_0^|x| f'(s) ds, even. With s = exp(phi(r)) the integral becomes
/// int_{-inf}^{F(x)} exp(2 phi(r)) phi'(r)^2 dr, whose integrand is smooth and
/// decays like exp(2r).
inline double f(double x) {
  const double a = std::abs(x);
  if (a > 1.0) throw DomainError("counterexample f is defined on [-1, 1]");
  if (a == 0.0) return 0.0;
  const double top = F(a);
  auto integrand = [](double r) {
    const double d = dphi(r);
    return std::exp(2.0 * phi(r)) * d * d;
  };
  // pieces widen as the integrand decays; past top - 40 it is below 1e-23
  // of the total
  double sum = 0.0, hi = top;
  for (double width : {1.0, 1.0, 2.0, 4.0, 8.0, 24.0}) {
    sum += boost::math::quadrature::gauss<double, 30>::integrate(integrand, hi - width, hi);
    hi -= width;
  }
  return sum;
}

inline Component1D f_component() {
  Component1D c;
  c.name = "ciii";
  c.f = [](double x) { return f(x); };
  c.df = [](double x) { return fprime(x); };
  c.d2f = [](double x) { return fsecond(x); };
  c.smoothness = Smoothness::C2;
  return c;
}

}  // namespace isoreal::counterexample
