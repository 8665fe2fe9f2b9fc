#pragma once

#include "isoreal/numerics.hpp"
#include "isoreal/potential.hpp"
#include "isoreal/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace isoreal::flow {

enum class Direction { Forward, Backward };

inline const char* to_string(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }

/// Raised when the right-hand side produces non-finite values.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <int D>
struct Sample {
  double t = 0.0;
  Vec<D> x = Vec<D>::Zero();
  /// Accumulated Laplacian integral from time 0 to t.
  double w = 0.0;
  double u = 0.0;
};

// Termination tags.
template <int D>
struct HitLevel {
  double level = 0.0;
  double tau = 0.0;
  Vec<D> point = Vec<D>::Zero();
};
template <int D>
struct CriticalConvergence {
  Vec<D> limit = Vec<D>::Zero();
};
struct DomainExit {
  int axis = 0;
  /// -1 for the lower face, +1 for the upper face.
  int side = 0;
};
struct MaxTime {};
struct StepUnderflow {};

template <int D>
using Termination =
    std::variant<HitLevel<D>, CriticalConvergence<D>, DomainExit, MaxTime, StepUnderflow>;

template <int D>
std::string termination_name(const Termination<D>& t) {
  switch (t.index()) {
    case 0: return "hit-level";
    case 1: return "critical-convergence";
    case 2: return "domain-exit";
    case 3: return "max-time";
    default: return "step-underflow";
  }
}

template <int D>
struct Trajectory {
  Direction direction = Direction::Forward;
  std::vector<Sample<D>> samples;
  Termination<D> termination = MaxTime{};
  int accepted_steps = 0;
  int rejected_steps = 0;

  const Sample<D>& back() const { return samples.back(); }
};

template <int D>
struct Stops {
  double max_time = 1e6;
  /// Integration box; the potential's natural domain when empty.
  std::optional<Box<D>> box;
  double grad_floor = 1e-9;
  std::optional<double> level;
};

struct Tolerances {
  double rtol = 1e-12;
  double atol = 1e-14;
  double max_step = std::numeric_limits<double>::infinity();
  /// Bisection tolerance in t when localizing events on dense output.
  double event_tol = 1e-12;
  int max_steps = 2'000'000;
  /// Keep every accepted step in Trajectory::samples; otherwise only the ends.
  bool record = true;
};

namespace detail {

template <int D>
using State = Eigen::Matrix<double, D + 1, 1>;

// Dormand-Prince 5(4) tableau.
struct DoPri {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

/// Right-hand side of the augmented system in the integration variable s >= 0:
/// dX/ds = sign * grad u(X), dW/ds = sign * lap u(X).
template <int D>
class Rhs {
 public:
  Rhs(const Potential<D>& u, double sign) : u_(u), sign_(sign) {}

  State<D> operator()(const State<D>& y) const {
    const Vec<D> x = y.template head<D>();
    auto [g, lap] = u_.gradient_laplacian(x);
    State<D> out;
    out.template head<D>() = sign_ * g;
    out[D] = sign_ * lap;
    if (!out.allFinite()) throw EvaluationError("non-finite gradient or Laplacian in flow");
    return out;
  }

 private:
  const Potential<D>& u_;
  double sign_;
};

template <int D>
struct StepResult {
  State<D> y;
  State<D> f_end;
  State<D> err;
};

template <int D>
StepResult<D> dopri_step(const Rhs<D>& rhs, const State<D>& y, const State<D>& k1, double h) {
  using T = DoPri;
  const State<D> k2 = rhs(y + h * (T::a21 * k1));
  const State<D> k3 = rhs(y + h * (T::a31 * k1 + T::a32 * k2));
  const State<D> k4 = rhs(y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3));
  const State<D> k5 = rhs(y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4));
  const State<D> k6 =
      rhs(y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5));
  StepResult<D> r;
  r.y = y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
  r.f_end = rhs(r.y);
  r.err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * r.f_end);
  return r;
}

/// Cubic Hermite interpolant on [0, h] from end values and slopes.
template <int D>
State<D> hermite(const State<D>& y0, const State<D>& f0, const State<D>& y1, const State<D>& f1,
                 double h, double theta) {
  const double t2 = theta * theta, t3 = t2 * theta;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
}

template <int D>
double error_norm(const State<D>& err, const State<D>& y0, const State<D>& y1,
                  const Tolerances& tol) {
  double s = 0.0;
  for (int i = 0; i < D + 1; ++i) {
    const double sc = tol.atol + tol.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    s += r * r;
  }
  return std::sqrt(s / (D + 1));
}

template <int D>
std::pair<int, int> nearest_face(const Box<D>& box, const Vec<D>& x) {
  int axis = 0, side = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < D; ++i) {
    if (x[i] - box.lo[i] < best) { best = x[i] - box.lo[i]; axis = i; side = -1; }
    if (box.hi[i] - x[i] < best) { best = box.hi[i] - x[i]; axis = i; side = 1; }
  }
  return {axis, side};
}

}  // namespace detail

/// Integrate X' = grad u(X) together with W' = lap u(X), W(0) = 0, from x0 in
/// the given direction until the first stop fires. Backward integration runs
/// X' = -grad u in the positive variable s and reports t = -s.
template <int D>
Trajectory<D> integrate(const Potential<D>& u, const Vec<D>& x0, Direction dir,
                        const Stops<D>& stops = {}, const Tolerances& tol = {}) {
  using State = detail::State<D>;
  const Box<D> box = stops.box ? *stops.box : u.domain();
  if (!box.contains(x0)) throw DomainError("flow start point outside the integration box");
  if (!(stops.grad_floor > 0.0)) throw InputError("grad_floor must be positive");

  const double sign = dir == Direction::Forward ? 1.0 : -1.0;
  const detail::Rhs<D> rhs(u, sign);
  Trajectory<D> traj;
  traj.direction = dir;

  State y;
  y.template head<D>() = x0;
  y[D] = 0.0;
  double u_cur = u.value(x0);
  traj.samples.push_back({0.0, x0, 0.0, u_cur});

  auto finish = [&](double s, const State& yy, double uu, Termination<D> term) {
    Sample<D> last{sign * s, yy.template head<D>(), yy[D], uu};
    if (traj.samples.size() == 1 && s == 0.0) {
      traj.samples.front() = last;
    } else if (tol.record) {
      if (traj.samples.back().t == last.t) traj.samples.pop_back();
      traj.samples.push_back(last);
    } else {
      if (traj.samples.size() > 1) traj.samples.pop_back();
      traj.samples.push_back(last);
    }
    traj.termination = std::move(term);
    return traj;
  };

  std::optional<double> level = stops.level;
  if (level && u_cur == *level)
    return finish(0.0, y, u_cur, HitLevel<D>{*level, 0.0, x0});
  // Side of the level the start point lies on. A crossing needs u - c to take
  // the opposite strict sign; merely rounding onto c near a critical point of
  // the level set does not count.
  const bool start_above = level && u_cur > *level;

  State k1 = rhs(y);
  if (k1.template head<D>().norm() < stops.grad_floor)
    return finish(0.0, y, u_cur, CriticalConvergence<D>{x0});

  // initial step (Hairer & Wanner, II.4)
  double h;
  {
    State scale;
    for (int i = 0; i < D + 1; ++i) scale[i] = tol.atol + tol.rtol * std::abs(y[i]);
    const double d0 = (y.array() / scale.array()).matrix().norm() / std::sqrt(D + 1.0);
    const double d1 = (k1.array() / scale.array()).matrix().norm() / std::sqrt(D + 1.0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min({h0, stops.max_time, tol.max_step});
    State k2;
    try {
      k2 = rhs(y + h0 * k1);
    } catch (const DomainError&) {
      k2 = k1;
    }
    const double d2 = ((k2 - k1).array() / scale.array()).matrix().norm() / std::sqrt(D + 1.0) / h0;
    const double m = std::max(d1, d2);
    const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 1.0 / 5.0);
    // the heuristic can return absurdly small steps when components sit near atol;
    // a step that is too large is simply rejected and shrunk
    h = std::min({std::max(std::min(100 * h0, h1), 1e-10), stops.max_time, tol.max_step});
  }

  double s = 0.0;
  for (int step = 0; step < tol.max_steps; ++step) {
    if (s >= stops.max_time) return finish(s, y, u_cur, MaxTime{});
    h = std::min(h, tol.max_step);
    // the final step lands exactly on max_time
    const bool last_step = h >= stops.max_time - s;
    if (last_step) h = stops.max_time - s;
    if (!last_step && h < 1e-14 * std::max(1.0, s)) return finish(s, y, u_cur, StepUnderflow{});

    detail::StepResult<D> res;
    try {
      res = detail::dopri_step(rhs, y, k1, h);
    } catch (const DomainError&) {
      // a stage left the region where u is defined
      ++traj.rejected_steps;
      h *= 0.25;
      if (h < 1e-14 * std::max(1.0, s)) {
        auto [axis, side] = detail::nearest_face(box, Vec<D>(y.template head<D>()));
        return finish(s, y, u_cur, DomainExit{axis, side});
      }
      continue;
    }
    const double err = detail::error_norm<D>(res.err, y, res.y, tol);
    if (!(err <= 1.0)) {
      ++traj.rejected_steps;
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      h *= fac;
      continue;
    }
    ++traj.accepted_steps;

    const State y1 = res.y;
    const State k7 = res.f_end;
    const Vec<D> x1 = y1.template head<D>();
    const bool outside = !box.contains(x1);
    double u1 = 0.0;
    bool u1_known = false;
    if (!outside) {
      u1 = u.value(x1);
      u1_known = true;
    }

    auto dense = [&](double dt) { return detail::hermite<D>(y, k1, y1, k7, h, dt / h); };
    auto exact = [&](double dt) {
      if (dt <= 0.0) return y;
      return detail::dopri_step(rhs, y, k1, dt).y;
    };

    // domain exit within this step
    std::optional<double> exit_dt;
    if (outside) {
      exit_dt = numerics::bisect(
          [&](double dt) { return box.margin(Vec<D>(dense(dt).template head<D>())); }, 0.0, h,
          tol.event_tol * std::max(1.0, s));
    }

    // level crossing within this step (u is monotone along the flow)
    if (level) {
      const double c = *level;
      auto past = [&](double uv) { return start_above ? uv < c : uv > c; };
      double upper = h;
      bool crossed = false;
      if (exit_dt) {
        upper = *exit_dt;
        crossed = past(u.value(Vec<D>(dense(upper).template head<D>())));
      } else {
        crossed = past(u1);
      }
      if (crossed) {
        auto g_dense = [&](double dt) {
          return u.value(Vec<D>(dense(dt).template head<D>())) - c;
        };
        double dt = numerics::bisect(g_dense, 0.0, upper, tol.event_tol * std::max(1.0, s));
        // polish with true Runge-Kutta sub-steps: dg/ds = sign * |grad u|^2
        State yc = exact(dt);
        for (int it = 0; it < 8; ++it) {
          const Vec<D> xc = yc.template head<D>();
          const double g = u.value(xc) - c;
          const double slope = sign * u.gradient(xc).squaredNorm();
          if (slope == 0.0 || g == 0.0) break;
          const double next = std::clamp(dt - g / slope, 0.0, upper);
          if (std::abs(next - dt) <= 1e-16 * std::max(1.0, s + dt)) {
            dt = next;
            yc = exact(dt);
            break;
          }
          dt = next;
          yc = exact(dt);
        }
        const Vec<D> xc = yc.template head<D>();
        const double uc = u.value(xc);
        return finish(s + dt, yc, uc, HitLevel<D>{c, sign * (s + dt), xc});
      }
    }

    if (exit_dt) {
      const State ye = exact(*exit_dt);
      Vec<D> xe = ye.template head<D>();
      auto [axis, side] = detail::nearest_face(box, xe);
      State yclamped = ye;
      for (int i = 0; i < D; ++i) yclamped[i] = std::clamp(ye[i], box.lo[i], box.hi[i]);
      double ue = 0.0;
      try {
        ue = u.value(Vec<D>(yclamped.template head<D>()));
      } catch (const DomainError&) {
        ue = u_cur;
      }
      return finish(s + *exit_dt, yclamped, ue, DomainExit{axis, side});
    }

    // accept
    s = last_step ? stops.max_time : s + h;
    y = y1;
    k1 = k7;
    u_cur = u1_known ? u1 : u.value(x1);
    if (tol.record) traj.samples.push_back({sign * s, x1, y1[D], u_cur});

    if (k7.template head<D>().norm() < stops.grad_floor)
      return finish(s, y, u_cur, CriticalConvergence<D>{x1});

    const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= fac;
  }
  return finish(s, y, u_cur, StepUnderflow{});
}

enum class HitStatus { Hit, CriticalConvergence, DomainExit, MaxTime, StepUnderflow };

inline const char* to_string(HitStatus s) {
  switch (s) {
    case HitStatus::Hit: return "hit";
    case HitStatus::CriticalConvergence: return "critical-convergence";
    case HitStatus::DomainExit: return "domain-exit";
    case HitStatus::MaxTime: return "max-time";
    case HitStatus::StepUnderflow: return "step-underflow";
  }
  return "?";
}

template <int D>
struct HittingResult {
  HitStatus status = HitStatus::MaxTime;
  /// Signed time to reach the level (negative when reached backward).
  double tau = 0.0;
  Vec<D> point = Vec<D>::Zero();
  /// Integral of the Laplacian from 0 to tau along the flow.
  double w = 0.0;
  double level_residual = 0.0;

  bool hit() const { return status == HitStatus::Hit; }
};

/// Time tau with u(X(tau, x0)) = c, and w = int_0^tau lap u(X(s, x0)) ds.
/// Runs backward when u(x0) > c, forward when u(x0) < c.
template <int D>
HittingResult<D> hitting_time(const Potential<D>& u, const Vec<D>& x0, double level,
                              Stops<D> stops = {}, Tolerances tol = {}) {
  stops.level = level;
  tol.record = false;
  const double u0 = u.value(x0);
  const Direction dir = u0 > level ? Direction::Backward : Direction::Forward;
  const auto traj = integrate(u, x0, dir, stops, tol);
  HittingResult<D> r;
  const auto& end = traj.back();
  r.point = end.x;
  r.w = end.w;
  r.tau = end.t;
  r.level_residual = end.u - level;
  switch (traj.termination.index()) {
    case 0: r.status = HitStatus::Hit; break;
    case 1: r.status = HitStatus::CriticalConvergence; break;
    case 2: r.status = HitStatus::DomainExit; break;
    case 3: r.status = HitStatus::MaxTime; break;
    default: r.status = HitStatus::StepUnderflow; break;
  }
  return r;
}

/// Raised by laplacian_integral when the trajectory stops before time t.
class IncompleteIntegral : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// W(t) = int_0^t lap u(X(s, x0)) ds; negative t integrates backward.
template <int D>
double laplacian_integral(const Potential<D>& u, const Vec<D>& x0, double t, Stops<D> stops = {},
                          Tolerances tol = {}) {
  if (t == 0.0) return 0.0;
  stops.max_time = std::abs(t);
  stops.level.reset();
  tol.record = false;
  const auto traj = integrate(u, x0, t > 0 ? Direction::Forward : Direction::Backward, stops, tol);
  if (!std::holds_alternative<MaxTime>(traj.termination))
    throw IncompleteIntegral("trajectory stopped (" + termination_name<D>(traj.termination) +
                             ") before t = " + std::to_string(t));
  return traj.back().w;
}

/// Position X(t, x0), requiring the flow to exist up to t.
template <int D>
Vec<D> flow_map(const Potential<D>& u, const Vec<D>& x0, double t, Stops<D> stops = {},
                Tolerances tol = {}) {
  if (t == 0.0) return x0;
  stops.max_time = std::abs(t);
  stops.level.reset();
  tol.record = false;
  const auto traj = integrate(u, x0, t > 0 ? Direction::Forward : Direction::Backward, stops, tol);
  if (!std::holds_alternative<MaxTime>(traj.termination))
    throw IncompleteIntegral("trajectory stopped (" + termination_name<D>(traj.termination) +
                             ") before t = " + std::to_string(t));
  return traj.back().x;
}

}  // namespace isoreal::flow
