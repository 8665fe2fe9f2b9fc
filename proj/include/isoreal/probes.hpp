#pragma once

#include "isoreal/conductivity.hpp"
#include "isoreal/critical.hpp"
#include "isoreal/flow.hpp"
#include "isoreal/numerics.hpp"
#include "isoreal/parallel.hpp"
#include "isoreal/potential.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace isoreal::probes {

enum class ProbeKind { SaddleLinf, StableCstar, TorusC2Rd, BouFG };

inline const char* to_string(ProbeKind k) {
  switch (k) {
    case ProbeKind::SaddleLinf: return "saddle-Linf";
    case ProbeKind::StableCstar: return "stable-Cstar";
    case ProbeKind::TorusC2Rd: return "torus-C2Rd";
    case ProbeKind::BouFG: return "bouFG";
  }
  return "?";
}

enum class Verdict { Bounded, Diverging, Unusable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Bounded: return "bounded";
    case Verdict::Diverging: return "diverging";
    case Verdict::Unusable: return "unusable";
  }
  return "?";
}

/// Raised when a probe's precondition fails (e.g. the point is not stable).
class ProbeRefused : public InputError {
 public:
  using InputError::InputError;
};

struct Stage {
  /// Distance to the singular set, or time.
  double parameter = 0.0;
  /// Observed sup of |w| (or |int lap u|) over the stage's samples; NaN if none.
  double value = 0.0;
  std::size_t samples = 0;
};

struct GrowthFit {
  std::string model;
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};

struct DivergenceRule {
  /// Growth must exceed factor * max(|first value|, floor).
  double factor = 3.0;
  double floor = 0.1;
  /// Number of trailing stages that must grow strictly and exceed the threshold.
  int run = 3;
  double min_r_squared = 0.9;
};

struct ProbeReport {
  ProbeKind kind = ProbeKind::SaddleLinf;
  std::string parameter_name;
  std::vector<Stage> stages;
  std::vector<GrowthFit> fits;
  /// Best fit among the models (highest R^2 with positive slope), if any.
  std::optional<GrowthFit> best;
  double threshold = 0.0;
  Verdict verdict = Verdict::Unusable;
  std::string note;

  double sup() const {
    double s = 0.0;
    for (const auto& st : stages)
      if (std::isfinite(st.value)) s = std::max(s, st.value);
    return s;
  }
};

using Model = std::pair<std::string, std::function<double(double)>>;

/// Fill fits, best, threshold and verdict of a report from its stages.
inline void decide(ProbeReport& r, const std::vector<Model>& models, const DivergenceRule& rule) {
  std::vector<double> p, v;
  for (const auto& s : r.stages) {
    if (!std::isfinite(s.value)) continue;
    p.push_back(s.parameter);
    v.push_back(s.value);
  }
  r.fits.clear();
  r.best.reset();
  if (static_cast<int>(v.size()) < std::max(rule.run, 3)) {
    r.verdict = Verdict::Unusable;
    if (r.note.empty()) r.note = "too few usable stages";
    return;
  }
  for (const auto& [name, transform] : models) {
    std::vector<double> x(p.size());
    std::transform(p.begin(), p.end(), x.begin(), transform);
    const auto lf = numerics::fit_line(x, v);
    GrowthFit g{name, lf.intercept, lf.slope, lf.r_squared};
    r.fits.push_back(g);
    if (g.slope > 0.0 && std::isfinite(g.r_squared) && (!r.best || g.r_squared > r.best->r_squared))
      r.best = g;
  }
  r.threshold = rule.factor * std::max(std::abs(v.front()), rule.floor);
  bool growing = true;
  const std::size_t n = v.size();
  for (std::size_t i = n - static_cast<std::size_t>(rule.run); i < n; ++i) {
    if (!(v[i] > r.threshold)) growing = false;
    if (i + 1 < n && !(v[i + 1] > v[i])) growing = false;
  }
  const bool fitted = r.best && r.best->r_squared >= rule.min_r_squared;
  r.verdict = growing && fitted ? Verdict::Diverging : Verdict::Bounded;
}

inline std::vector<Model> distance_models() {
  return {{"ln(1/d)", [](double d) { return std::log(1.0 / d); }},
          {"ln ln(1/d)", [](double d) { return std::log(std::log(1.0 / d)); }},
          {"ln^2 ln(1/d)", [](double d) {
             const double l = std::log(std::log(1.0 / d));
             return l * l;
           }}};
}

inline std::vector<Model> time_models() {
  return {{"t", [](double t) { return t; }}, {"ln t", [](double t) { return std::log(t); }}};
}

struct SaddleProbeOptions {
  /// Stages k = 1..stages at distance 2^-k.
  int stages = 40;
  /// Anchor distance from the saddle as a fraction of the box's smallest half-width.
  double anchor_fraction = 0.5;
  /// Relocate anchors onto the manifold by bisection on the exit side.
  bool refine_anchors = true;
  /// Level c; u(x*) when unset.
  std::optional<double> level;
  DivergenceRule rule{};
  conductivity::SynthesisOptions<2> synthesis{};
};

namespace detail {

struct Anchor {
  Vec<2> point;
  Vec<2> normal;
  bool stable = true;
};

inline Vec<2> polyline_anchor(const std::vector<Vec<2>>& line, const Vec<2>& saddle, double reach,
                              Vec<2>& tangent) {
  double far = 0.0;
  for (const auto& p : line) far = std::max(far, (p - saddle).norm());
  const double target = std::min(reach, 0.5 * far);
  std::size_t k = 1;
  while (k + 1 < line.size() && (line[k] - saddle).norm() < target) ++k;
  const std::size_t a = k > 0 ? k - 1 : 0;
  const std::size_t b = std::min(line.size() - 1, k + 1);
  tangent = (line[b] - line[a]).normalized();
  return line[k];
}

}  // namespace detail

/// Samples w at points approaching the stable and unstable manifolds of a
/// 2-D saddle (distance 2^-k from anchors on each branch along the normal,
/// and along the quadrant bisectors toward the saddle).
inline ProbeReport probe_saddle_boundedness(const Potential<2>& u,
                                            const critical::CriticalPoint<2>& saddle,
                                            const critical::ManifoldPair<2>& manifolds,
                                            const Box<2>& box, const SaddleProbeOptions& opt = {}) {
  if (saddle.kind != critical::Kind::Saddle) throw ProbeRefused("saddle probe needs a saddle point");
  const Vec<2> xs = saddle.location;
  const double c = opt.level ? *opt.level : u.value(xs);
  auto syn = opt.synthesis;
  syn.box = syn.box ? syn.box : box;

  // eigenvectors: column 0 has the negative eigenvalue
  const Vec<2> vs = saddle.eigenvectors.col(0);
  const Vec<2> vu = saddle.eigenvectors.col(1);
  const double reach = opt.anchor_fraction * 0.5 * std::min(box.hi[0] - box.lo[0], box.hi[1] - box.lo[1]);

  std::vector<detail::Anchor> anchors;
  for (const auto* m : {&manifolds.stable, &manifolds.unstable}) {
    for (const auto& br : m->branches) {
      if (br.size() < 3) continue;
      Vec<2> t;
      const Vec<2> a = detail::polyline_anchor(br, xs, reach, t);
      anchors.push_back({a, Vec<2>(-t[1], t[0]), m->flavor == critical::Flavor::Stable});
    }
  }

  auto side = [&](const detail::Anchor& an, const Vec<2>& p) -> int {
    flow::Stops<2> stops;
    stops.box = *syn.box;
    stops.grad_floor = syn.grad_floor;
    flow::HittingResult<2> h;
    try {
      h = flow::hitting_time(u, p, c, stops, syn.tol);
    } catch (const DomainError&) {
      return 0;
    }
    if (!h.hit()) return 0;
    const double s = (h.point - xs).dot(an.stable ? vu : vs);
    return s > 0 ? 1 : (s < 0 ? -1 : 0);
  };

  if (opt.refine_anchors) {
    for (auto& an : anchors) {
      double lo = -1e-3 * box.diameter(), hi = -lo;
      const int slo = side(an, an.point + lo * an.normal);
      const int shi = side(an, an.point + hi * an.normal);
      if (slo == 0 || shi == 0 || slo == shi) continue;
      for (int it = 0; it < 80 && hi - lo > 4e-16 * std::max(1.0, an.point.norm()); ++it) {
        const double mid = 0.5 * (lo + hi);
        const int sm = side(an, an.point + mid * an.normal);
        if (sm == 0) {
          lo = hi = mid;
          break;
        }
        (sm == slo ? lo : hi) = mid;
      }
      an.point += 0.5 * (lo + hi) * an.normal;
    }
  }

  std::vector<std::pair<Vec<2>, Vec<2>>> approaches;  // base point, unit direction
  for (const auto& an : anchors) {
    approaches.push_back({an.point, an.normal});
    approaches.push_back({an.point, -an.normal});
  }
  for (double a : {1.0, -1.0})
    for (double b : {1.0, -1.0}) approaches.push_back({xs, (a * vs + b * vu).normalized()});

  ProbeReport r;
  r.kind = ProbeKind::SaddleLinf;
  r.parameter_name = "distance";
  const std::size_t per = approaches.size();
  std::vector<double> w(static_cast<std::size_t>(opt.stages) * per,
                        std::numeric_limits<double>::quiet_NaN());
  parallel_for(w.size(), syn.workers, [&](std::size_t i) {
    const int k = static_cast<int>(i / per) + 1;
    const auto& [base, dir] = approaches[i % per];
    const Vec<2> p = base + std::ldexp(1.0, -k) * dir;
    auto s1 = syn;
    s1.workers = 1;
    const auto v = conductivity::node_value<2>(u, p, c, s1);
    if (v.status == conductivity::NodeStatus::Ok) w[i] = v.w;
  });
  std::size_t hits = 0;
  for (int k = 1; k <= opt.stages; ++k) {
    Stage st;
    st.parameter = std::ldexp(1.0, -k);
    st.value = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j < per; ++j) {
      const double x = w[static_cast<std::size_t>(k - 1) * per + j];
      if (std::isnan(x)) continue;
      st.value = std::isnan(st.value) ? std::abs(x) : std::max(st.value, std::abs(x));
      ++st.samples;
    }
    hits += st.samples;
    r.stages.push_back(st);
  }
  if (hits == 0) {
    r.verdict = Verdict::Unusable;
    r.note = "no sample reached the level set";
    return r;
  }
  decide(r, distance_models(), opt.rule);
  return r;
}

template <int D>
struct StableProbeOptions {
  /// Times t = 2^k for k in [k_min, k_max].
  int k_min = 0;
  int k_max = 20;
  /// Samples per axis of the cell-centred grid over Q*.
  int samples = 5;
  /// Box trajectories must stay in; the potential's domain when unset.
  std::optional<Box<D>> kstar;
  // small enough that slowly converging (degenerate) flows are not parked early
  double grad_floor = 1e-14;
  DivergenceRule rule{};
  flow::Tolerances tol{};
  unsigned workers = 1;
};

/// sup over x in Q* of |int_0^t lap u(X(s, x)) ds| for t = 2^k, forward for
/// sinks and backward for sources. Degenerate points are probed in the
/// direction whose trajectories stay in K*. Throws ProbeRefused when the
/// point is not critical or no direction keeps the samples in K*.
template <int D>
ProbeReport probe_stable_point(const Potential<D>& u, const std::type_identity_t<Vec<D>>& point,
                               const Box<D>& qstar, const StableProbeOptions<D>& opt = {}) {
  if (!(u.gradient(point).norm() <= 1e-8)) throw ProbeRefused("not stable: point is not critical");
  const auto cp = critical::classify(u, point);
  if (cp.kind == critical::Kind::Saddle) throw ProbeRefused("not stable: point is a saddle");
  const Box<D> kstar = opt.kstar ? *opt.kstar : u.domain();

  std::vector<double> times;
  for (int k = opt.k_min; k <= opt.k_max; ++k) times.push_back(std::ldexp(1.0, k));
  const auto seeds = critical::detail::seed_grid(qstar, opt.samples);

  // W at each scheduled time for one sample; empty when the sample leaves K*.
  auto run = [&](const Vec<D>& x0, flow::Direction dir) -> std::vector<double> {
    std::vector<double> out;
    flow::Stops<D> stops;
    stops.box = kstar;
    stops.grad_floor = opt.grad_floor;
    auto tol = opt.tol;
    tol.record = false;
    Vec<D> x = x0;
    double w = 0.0, t = 0.0;
    bool parked = false;
    double park_lap = 0.0;
    for (double target : times) {
      if (!parked) {
        stops.max_time = target - t;
        const auto traj = flow::integrate(u, x, dir, stops, tol);
        const auto& end = traj.back();
        if (std::holds_alternative<flow::MaxTime>(traj.termination)) {
          x = end.x;
          w += end.w;
          t = target;
        } else if (std::holds_alternative<flow::CriticalConvergence<D>>(traj.termination)) {
          // at the critical point the integrand is constant
          x = end.x;
          w += end.w;
          t += std::abs(end.t);
          parked = true;
          park_lap = (dir == flow::Direction::Forward ? 1.0 : -1.0) * u.laplacian(x);
        } else {
          return {};
        }
      }
      if (parked) {
        w += park_lap * (target - t);
        t = target;
      }
      out.push_back(w);
    }
    return out;
  };

  auto sweep = [&](flow::Direction dir) -> std::optional<std::vector<std::vector<double>>> {
    std::vector<std::vector<double>> all(seeds.size());
    parallel_for(seeds.size(), opt.workers, [&](std::size_t i) {
      try {
        all[i] = run(seeds[i], dir);
      } catch (const DomainError&) {
        all[i].clear();
      }
    });
    for (const auto& a : all)
      if (a.empty()) return std::nullopt;
    return all;
  };

  std::optional<std::vector<std::vector<double>>> values;
  flow::Direction used = flow::Direction::Forward;
  if (cp.kind == critical::Kind::Sink) {
    values = sweep(flow::Direction::Forward);
  } else if (cp.kind == critical::Kind::Source) {
    values = sweep(flow::Direction::Backward);
    used = flow::Direction::Backward;
  } else {
    values = sweep(flow::Direction::Forward);
    if (!values) {
      values = sweep(flow::Direction::Backward);
      used = flow::Direction::Backward;
    }
  }
  if (!values) throw ProbeRefused("not stable: trajectories from Q* leave K*");

  ProbeReport r;
  r.kind = ProbeKind::StableCstar;
  r.parameter_name = "t";
  for (std::size_t k = 0; k < times.size(); ++k) {
    Stage st;
    st.parameter = times[k];
    st.samples = values->size();
    for (const auto& v : *values) st.value = std::max(st.value, std::abs(v[k]));
    r.stages.push_back(st);
  }
  r.note = std::string("direction ") + flow::to_string(used) + ", point classified " +
           critical::to_string(cp.kind);
  decide(r, time_models(), opt.rule);
  return r;
}

}  // namespace isoreal::probes
