#pragma once

#include "isoreal/counterexample.hpp"
#include "isoreal/potential.hpp"
#include "isoreal/types.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace isoreal::catalog {

using std::numbers::pi;

/// u(x, y) = cos y - cos x on [-pi, pi]^2, saddle at the origin.
inline Potential<2> cos_saddle() {
  return make_closed_form<2>(
      "cos-saddle", [](const Vec<2>& p) { return std::cos(p[1]) - std::cos(p[0]); },
      [](const Vec<2>& p) { return Vec<2>(std::sin(p[0]), -std::sin(p[1])); },
      [](const Vec<2>& p) {
        Mat<2> h;
        h << std::cos(p[0]), 0.0, 0.0, -std::cos(p[1]);
        return h;
      },
      Box<2>::cube(-pi, pi))
      .with_periods({2 * pi, 2 * pi});
}

/// u(x, y) = (y^3 - x^3) / 3 on [-1, 1]^2, degenerate critical point at the origin.
inline Potential<2> cubic() {
  return make_closed_form<2>(
      "cubic-degenerate",
      [](const Vec<2>& p) { return (p[1] * p[1] * p[1] - p[0] * p[0] * p[0]) / 3.0; },
      [](const Vec<2>& p) { return Vec<2>(-p[0] * p[0], p[1] * p[1]); },
      [](const Vec<2>& p) {
        Mat<2> h;
        h << -2.0 * p[0], 0.0, 0.0, 2.0 * p[1];
        return h;
      },
      Box<2>::cube(-1.0, 1.0));
}

/// Linear potential u = a . x.
template <int D>
Potential<D> linear(const Vec<D>& a, std::string id = {}) {
  if (id.empty()) id = "linear";
  return make_closed_form<D>(
      std::move(id), [a](const Vec<D>& p) { return a.dot(p); }, [a](const Vec<D>&) { return a; },
      [](const Vec<D>&) { return Mat<D>::Zero().eval(); }, Box<D>::cube(-10.0, 10.0));
}

/// u(x, y) = x + amplitude sin y. Gradient never vanishes for |amplitude| < 1.
inline Potential<2> wavy_ramp(double amplitude = 0.3) {
  return make_closed_form<2>(
             "wavy-ramp", [amplitude](const Vec<2>& p) { return p[0] + amplitude * std::sin(p[1]); },
             [amplitude](const Vec<2>& p) { return Vec<2>(1.0, amplitude * std::cos(p[1])); },
             [amplitude](const Vec<2>& p) {
               Mat<2> h;
               h << 0.0, 0.0, 0.0, -amplitude * std::sin(p[1]);
               return h;
             },
             Box<2>::cube(-4.0, 4.0))
      .with_parameters({{"amplitude", amplitude}});
}

/// u = -|x|^2 / 2, a sink at the origin.
template <int D>
Potential<D> quadratic_cap() {
  return make_closed_form<D>(
      "quadratic-cap", [](const Vec<D>& p) { return -0.5 * p.squaredNorm(); },
      [](const Vec<D>& p) { return Vec<D>(-p); },
      [](const Vec<D>&) { return Mat<D>(-Mat<D>::Identity()); }, Box<D>::cube(-1.0, 1.0));
}

/// u = (x^2 + y^2)/2 - z^2, harmonic saddle in 3-D with a 2-D unstable manifold.
inline Potential<3> saddle_3d() {
  return make_closed_form<3>(
      "saddle-3d",
      [](const Vec<3>& p) { return 0.5 * (p[0] * p[0] + p[1] * p[1]) - p[2] * p[2]; },
      [](const Vec<3>& p) { return Vec<3>(p[0], p[1], -2.0 * p[2]); },
      [](const Vec<3>&) { return Vec<3>(1.0, 1.0, -2.0).asDiagonal().toDenseMatrix().eval(); },
      Box<3>::cube(-1.0, 1.0));
}

// ---------------------------------------------------------------------------
// 1-D components for separable potentials.

namespace components {

/// a t^2 / 2, so the second derivative is a.
inline Component1D quadratic(double a) {
  std::ostringstream name;
  name << "sq" << a;
  Component1D c;
  c.name = name.str();
  c.f = [a](double t) { return 0.5 * a * t * t; };
  c.df = [a](double t) { return a * t; };
  c.d2f = [a](double) { return a; };
  return c;
}

inline Component1D identity() {
  Component1D c;
  c.name = "lin";
  c.f = [](double t) { return t; };
  c.df = [](double) { return 1.0; };
  c.d2f = [](double) { return 0.0; };
  c.period = 1.0;
  c.derivative_zeros = std::vector<double>{};
  return c;
}

/// 1 - cos t.
inline Component1D one_minus_cos() {
  Component1D c;
  c.name = "onemcos";
  c.f = [](double t) { return 1.0 - std::cos(t); };
  c.df = [](double t) { return std::sin(t); };
  c.d2f = [](double t) { return std::cos(t); };
  c.period = 2 * pi;
  c.derivative_zeros = std::vector<double>{0.0, pi};
  return c;
}

/// cos t - 1.
inline Component1D cos_minus_one() {
  Component1D c;
  c.name = "cosmone";
  c.f = [](double t) { return std::cos(t) - 1.0; };
  c.df = [](double t) { return -std::sin(t); };
  c.d2f = [](double t) { return -std::cos(t); };
  c.period = 2 * pi;
  c.derivative_zeros = std::vector<double>{0.0, pi};
  return c;
}

/// -cos(2 pi t), derivative 2 pi sin(2 pi t) of period 1.
inline Component1D minus_cos_2pi() {
  Component1D c;
  c.name = "mcos2pi";
  c.f = [](double t) { return -std::cos(2 * pi * t); };
  c.df = [](double t) { return 2 * pi * std::sin(2 * pi * t); };
  c.d2f = [](double t) { return 4 * pi * pi * std::cos(2 * pi * t); };
  c.period = 1.0;
  c.derivative_zeros = std::vector<double>{0.0, 0.5};
  return c;
}

/// 2t + sin(2 pi t) / (2 pi), derivative 2 + cos(2 pi t) >= 1.
inline Component1D two_plus_cos() {
  Component1D c;
  c.name = "twopluscos";
  c.f = [](double t) { return 2.0 * t + std::sin(2 * pi * t) / (2 * pi); };
  c.df = [](double t) { return 2.0 + std::cos(2 * pi * t); };
  c.d2f = [](double t) { return -2 * pi * std::sin(2 * pi * t); };
  c.period = 1.0;
  c.derivative_zeros = std::vector<double>{};
  return c;
}

/// Component from a token: lin, sq<a>, onemcos, cosmone, mcos2pi, twopluscos, ciii.
inline Component1D from_token(std::string_view tok) {
  if (tok == "lin") return identity();
  if (tok == "onemcos") return one_minus_cos();
  if (tok == "cosmone") return cos_minus_one();
  if (tok == "mcos2pi") return minus_cos_2pi();
  if (tok == "twopluscos") return two_plus_cos();
  if (tok == "ciii") return counterexample::f_component();
  if (tok.size() > 2 && tok.substr(0, 2) == "sq") {
    const std::string num(tok.substr(2));
    std::size_t used = 0;
    double a = 0.0;
    try {
      a = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == num.size() && used > 0) return quadratic(a);
  }
  throw InputError("unknown separable component '" + std::string(tok) + "'");
}

}  // namespace components

/// Separable potential from a list of components with a default box [-1, 1]^D
/// (one period [0, T] per axis when every component is periodic).
template <int D>
Potential<D> separable(const std::vector<Component1D>& comps, std::string id = {}) {
  Box<D> box = Box<D>::cube(-1.0, 1.0);
  return make_separable<D>(comps, box, std::move(id));
}

/// The separable counterexample f(x) + g(y), g = -y^2 / 2, on [-1, 1]^2.
inline Potential<2> counterexample_iii() {
  return make_separable<2>(std::vector{counterexample::f_component(), components::quadratic(-1.0)},
                           Box<2>::cube(-1.0, 1.0), "counterexample-iii");
}

/// Named separable presets accepted after "separable:".
inline std::vector<std::string> separable_presets() {
  return {"x1-cos", "two-plus-cos", "cos-cos", "quad-saddle", "unbalanced", "cos-pair"};
}

inline std::vector<Component1D> separable_preset(std::string_view name) {
  using namespace components;
  if (name == "x1-cos") return {identity(), minus_cos_2pi()};
  if (name == "two-plus-cos") return {two_plus_cos(), two_plus_cos()};
  if (name == "cos-cos") return {minus_cos_2pi(), minus_cos_2pi()};
  if (name == "quad-saddle") return {quadratic(1.0), quadratic(-1.0)};
  if (name == "unbalanced") return {quadratic(2.0), quadratic(-3.0)};
  if (name == "cos-pair") return {one_minus_cos(), cos_minus_one()};
  return {};
}

/// Parse the part after "separable:" into components: a preset name or a
/// comma-separated token list.
inline std::vector<Component1D> parse_separable(std::string_view spec) {
  if (auto preset = separable_preset(spec); !preset.empty()) return preset;
  std::vector<Component1D> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const auto tok = spec.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                        : comma - start);
    if (tok.empty()) throw InputError("empty component in separable spec");
    out.push_back(components::from_token(tok));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Box for a separable spec: unit cell when all components are periodic with
/// period 1, otherwise [-1, 1] per axis; the cos pair lives on [-pi, pi].
template <int D>
Box<D> separable_box(const std::vector<Component1D>& comps) {
  Box<D> b = Box<D>::cube(-1.0, 1.0);
  bool all_unit = true;
  for (const auto& c : comps) all_unit = all_unit && c.period && *c.period == 1.0;
  if (all_unit) return Box<D>::cube(0.0, 1.0);
  for (int i = 0; i < D && i < static_cast<int>(comps.size()); ++i) {
    if (comps[i].period && std::abs(*comps[i].period - 2 * pi) < 1e-12) {
      b.lo[i] = -pi;
      b.hi[i] = pi;
    }
  }
  return b;
}

/// Closed-form catalog ids (separable specs and grid files are resolved elsewhere).
inline std::vector<std::string> ids() {
  return {"cos-saddle", "cubic-degenerate", "counterexample-iii", "linear-xy", "linear-x",
          "wavy-ramp",  "quadratic-cap",    "saddle-3d"};
}

inline std::string describe(std::string_view id) {
  if (id == "cos-saddle") return "u = cos y - cos x on [-pi,pi]^2 (saddle at 0)";
  if (id == "cubic-degenerate") return "u = (y^3 - x^3)/3 on [-1,1]^2 (zero Hessian at 0)";
  if (id == "counterexample-iii") return "u = f(x) - y^2/2, f from x = exp(F + ln^2|F|)";
  if (id == "linear-xy") return "u = x + y";
  if (id == "linear-x") return "u = x";
  if (id == "wavy-ramp") return "u = x + 0.3 sin y";
  if (id == "quadratic-cap") return "u = -(x^2 + y^2)/2 (sink at 0)";
  if (id == "saddle-3d") return "u = (x^2 + y^2)/2 - z^2";
  return {};
}

}  // namespace isoreal::catalog
