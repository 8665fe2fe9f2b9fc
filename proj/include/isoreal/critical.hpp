#pragma once

#include "isoreal/flow.hpp"
#include "isoreal/parallel.hpp"
#include "isoreal/potential.hpp"
#include "isoreal/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

namespace isoreal::critical {

enum class Kind { Saddle, Sink, Source, Degenerate };

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::Saddle: return "saddle";
    case Kind::Sink: return "sink";
    case Kind::Source: return "source";
    case Kind::Degenerate: return "degenerate";
  }
  return "?";
}

template <int D>
struct CriticalPoint {
  Vec<D> location = Vec<D>::Zero();
  /// |grad u| at location.
  double residual = 0.0;
  /// Hessian eigenvalues, ascending, with matching unit eigenvectors as columns.
  Vec<D> eigenvalues = Vec<D>::Zero();
  Mat<D> eigenvectors = Mat<D>::Identity();
  Kind kind = Kind::Degenerate;
  double laplacian = 0.0;
  /// Largest probed radius without another critical point; 0 when not probed.
  double isolation_radius = 0.0;
};

struct ClassifyOptions {
  /// Eigenvalues with |lambda| < rel_threshold * max(1, spectral radius) count as zero.
  double rel_threshold = 1e-7;
  /// Largest |grad u| accepted as critical.
  double max_residual = 1e-8;
};

/// Eigen-decomposition and classification of the Hessian at x.
/// Throws InputError when |grad u(x)| exceeds opt.max_residual.
template <int D>
CriticalPoint<D> classify(const Potential<D>& u, const std::type_identity_t<Vec<D>>& x,
                          const ClassifyOptions& opt = {}) {
  CriticalPoint<D> cp;
  cp.location = x;
  cp.residual = u.gradient(x).norm();
  if (!(cp.residual <= opt.max_residual))
    throw InputError("classify: |grad u| = " + std::to_string(cp.residual) +
                     " exceeds the critical-point tolerance");
  const Mat<D> h = u.hessian(x);
  Eigen::SelfAdjointEigenSolver<Mat<D>> es(0.5 * (h + h.transpose()));
  cp.eigenvalues = es.eigenvalues();
  cp.eigenvectors = es.eigenvectors();
  cp.laplacian = u.laplacian(x);

  const double rho = cp.eigenvalues.cwiseAbs().maxCoeff();
  const double thr = opt.rel_threshold * std::max(1.0, rho);
  int neg = 0, pos = 0;
  for (int i = 0; i < D; ++i) {
    if (cp.eigenvalues[i] < -thr) ++neg;
    else if (cp.eigenvalues[i] > thr) ++pos;
  }
  if (neg + pos < D) cp.kind = Kind::Degenerate;
  else if (neg == D) cp.kind = Kind::Sink;
  else if (pos == D) cp.kind = Kind::Source;
  else cp.kind = Kind::Saddle;
  return cp;
}

struct LaplacianCheck {
  double value = 0.0;
  bool passes = false;
};

/// |lap u(x)| <= tol. A necessary condition for a regular isotropic
/// conductivity near a critical point; it is not sufficient.
template <int D>
LaplacianCheck check_laplacian_vanishing(const Potential<D>& u, const std::type_identity_t<Vec<D>>& x,
                                         double tol = 1e-8) {
  LaplacianCheck c;
  c.value = u.laplacian(x);
  c.passes = std::abs(c.value) <= tol;
  return c;
}

struct SearchOptions {
  /// Seeds per axis (cell centres of an n^D grid over the box).
  int seeds = 12;
  int max_iter = 200;
  /// Converged roots must satisfy |grad u| <= accept_residual.
  double accept_residual = 1e-10;
  /// Duplicate radius and boundary exclusion, relative to the box diameter.
  double cluster_rel = 1e-6;
  /// Seeds per axis of the local grid used to probe isolation radii.
  int isolation_seeds = 5;
  unsigned workers = 1;
  ClassifyOptions classify{};
};

namespace detail {

// Newton on grad u = 0 with a Levenberg-Marquardt fallback when the Hessian is
// singular or the Newton step does not reduce |grad u|. Returns nothing when
// the iteration leaves the box or stalls.
template <int D>
std::optional<Vec<D>> newton_root(const Potential<D>& u, Vec<D> x, const Box<D>& box,
                                  const SearchOptions& opt) {
  double mu = 1e-3;
  try {
    Vec<D> g = u.gradient(x);
    double gn = g.norm();
    for (int it = 0; it < opt.max_iter; ++it) {
      if (gn == 0.0) return x;
      const Mat<D> h = u.hessian(x);
      Vec<D> step;
      bool newton_ok = false;
      Eigen::FullPivLU<Mat<D>> lu(h);
      lu.setThreshold(1e-14);
      if (lu.isInvertible()) {
        step = -lu.solve(g);
        if (step.allFinite()) {
          const Vec<D> xn = x + step;
          if (box.contains(xn)) {
            const Vec<D> gnext = u.gradient(xn);
            if (gnext.norm() < gn) {
              newton_ok = true;
              x = xn;
              g = gnext;
              gn = g.norm();
            }
          }
        }
      }
      if (!newton_ok) {
        // damped minimization of |grad u|^2 / 2
        bool improved = false;
        for (int k = 0; k < 30 && !improved; ++k) {
          const Mat<D> a = h.transpose() * h + mu * Mat<D>::Identity();
          step = -a.ldlt().solve(h.transpose() * g);
          const Vec<D> xn = x + step;
          if (step.allFinite() && box.contains(xn)) {
            const Vec<D> gnext = u.gradient(xn);
            if (gnext.norm() < gn) {
              x = xn;
              g = gnext;
              gn = g.norm();
              mu = std::max(mu * 0.3, 1e-12);
              improved = true;
              break;
            }
          }
          mu *= 10.0;
        }
        if (!improved) return gn <= opt.accept_residual ? std::optional<Vec<D>>(x) : std::nullopt;
      }
      if (step.norm() <= 1e-13 * std::max(1.0, x.norm())) break;
    }
    if (gn <= opt.accept_residual) return x;
  } catch (const DomainError&) {
  }
  return std::nullopt;
}

template <int D>
std::vector<Vec<D>> seed_grid(const Box<D>& box, int n) {
  std::vector<Vec<D>> seeds;
  std::size_t total = 1;
  for (int i = 0; i < D; ++i) total *= static_cast<std::size_t>(n);
  seeds.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    Vec<D> x;
    for (int i = 0; i < D; ++i) {
      const int k = static_cast<int>(r % n);
      r /= n;
      x[i] = box.lo[i] + (k + 0.5) * (box.hi[i] - box.lo[i]) / n;
    }
    seeds.push_back(x);
  }
  return seeds;
}

template <int D>
std::vector<Vec<D>> roots_from(const Potential<D>& u, const std::vector<Vec<D>>& seeds,
                               const Box<D>& box, const SearchOptions& opt, double radius,
                               bool keep_boundary) {
  std::vector<std::optional<Vec<D>>> found(seeds.size());
  parallel_for(seeds.size(), opt.workers,
               [&](std::size_t i) { found[i] = newton_root(u, seeds[i], box, opt); });
  std::vector<Vec<D>> roots;
  for (const auto& f : found) {
    if (!f) continue;
    // points on the boundary belong to a neighbouring cell, not to the open box
    if (!keep_boundary && box.margin(*f) < radius) continue;
    const bool dup = std::any_of(roots.begin(), roots.end(),
                                 [&](const Vec<D>& r) { return (r - *f).norm() < radius; });
    if (!dup) roots.push_back(*f);
  }
  return roots;
}

}  // namespace detail

/// Critical points of u in the open box, by multi-start Newton from an
/// n^D grid of seeds. Results are sorted lexicographically by location.
template <int D>
std::vector<CriticalPoint<D>> find_critical_points(const Potential<D>& u, const Box<D>& box,
                                                   const SearchOptions& opt = {}) {
  if (opt.seeds < 2) throw InputError("critical-point search needs at least 2 seeds per axis");
  const double radius = opt.cluster_rel * box.diameter();
  std::vector<Vec<D>> roots =
      detail::roots_from(u, detail::seed_grid(box, opt.seeds), box, opt, radius, false);
  std::sort(roots.begin(), roots.end(), [](const Vec<D>& a, const Vec<D>& b) {
    for (int i = 0; i < D; ++i)
      if (a[i] != b[i]) return a[i] < b[i];
    return false;
  });

  std::vector<CriticalPoint<D>> out;
  out.reserve(roots.size());
  for (const Vec<D>& r : roots) {
    auto cp = classify(u, r, opt.classify);
    // isolation: nearest other root, then a densified local search around r.
    // Roots on or past the box boundary count here.
    double iso = box.diameter();
    for (const Vec<D>& q : roots)
      if (&q != &r) iso = std::min(iso, (q - r).norm());
    const Box<D> local{r - Vec<D>::Constant(iso), r + Vec<D>::Constant(iso)};
    for (const Vec<D>& q : detail::roots_from(u, detail::seed_grid(local, opt.isolation_seeds),
                                              local, opt, radius, true)) {
      const double d = (q - r).norm();
      if (d >= radius) iso = std::min(iso, d);
    }
    cp.isolation_radius = iso;
    out.push_back(cp);
  }
  return out;
}

enum class Flavor { Stable, Unstable };

inline const char* to_string(Flavor f) { return f == Flavor::Stable ? "stable" : "unstable"; }

template <int D>
struct Manifold {
  Flavor flavor = Flavor::Stable;
  Vec<D> saddle = Vec<D>::Zero();
  /// Each branch starts at the saddle and follows one trajectory outward.
  std::vector<std::vector<Vec<D>>> branches;
};

struct TraceOptions {
  /// Offset from the saddle, relative to the box diameter.
  double offset_rel = 1e-6;
  /// Target spacing between polyline vertices, relative to the box diameter.
  double spacing_rel = 1e-3;
  /// Trajectories per two-dimensional manifold in 3-D.
  int fan = 16;
  double max_time = 1e4;
};

template <int D>
struct ManifoldPair {
  Manifold<D> stable;
  Manifold<D> unstable;
};

/// Stable and unstable manifolds of a saddle, truncated at the box.
/// Stable branches are integrated backward from x* +- delta v for the
/// eigenvectors v with lambda < 0; unstable ones forward for lambda > 0.
template <int D>
ManifoldPair<D> trace_manifolds(const Potential<D>& u, const CriticalPoint<D>& saddle,
                                const Box<D>& box, const TraceOptions& opt = {}) {
  if (saddle.kind != Kind::Saddle) throw InputError("trace_manifolds needs a saddle");
  const double diam = box.diameter();
  const double delta = opt.offset_rel * diam;

  // time step cap that keeps vertices about spacing_rel * diam apart
  double speed = 0.0;
  for (const Vec<D>& p : detail::seed_grid(box, 16)) {
    try {
      speed = std::max(speed, u.gradient(p).norm());
    } catch (const DomainError&) {
    }
  }
  flow::Tolerances tol;
  tol.max_step = speed > 0.0 ? opt.spacing_rel * diam / speed : std::numeric_limits<double>::infinity();
  flow::Stops<D> stops;
  stops.box = box;
  stops.max_time = opt.max_time;
  stops.grad_floor = 1e-12;

  auto branch = [&](const Vec<D>& dir, flow::Direction d) {
    std::vector<Vec<D>> line{saddle.location};
    const Vec<D> x0 = saddle.location + delta * dir;
    if (!box.contains(x0)) return line;
    const auto traj = flow::integrate(u, x0, d, stops, tol);
    for (const auto& s : traj.samples) line.push_back(s.x);
    return line;
  };

  auto build = [&](Flavor fl) {
    Manifold<D> m;
    m.flavor = fl;
    m.saddle = saddle.location;
    const auto dir = fl == Flavor::Stable ? flow::Direction::Backward : flow::Direction::Forward;
    std::vector<int> axes;
    for (int i = 0; i < D; ++i) {
      const bool neg = saddle.eigenvalues[i] < 0.0;
      if (neg == (fl == Flavor::Stable)) axes.push_back(i);
    }
    if (axes.size() == 1) {
      const Vec<D> v = saddle.eigenvectors.col(axes[0]);
      m.branches.push_back(branch(v, dir));
      m.branches.push_back(branch(-v, dir));
    } else if (axes.size() == 2) {
      const Vec<D> a = saddle.eigenvectors.col(axes[0]);
      const Vec<D> b = saddle.eigenvectors.col(axes[1]);
      for (int k = 0; k < opt.fan; ++k) {
        const double th = 2.0 * std::numbers::pi * k / opt.fan;
        m.branches.push_back(branch(Vec<D>(std::cos(th) * a + std::sin(th) * b), dir));
      }
    }
    return m;
  };
  return {build(Flavor::Stable), build(Flavor::Unstable)};
}

/// Euclidean distance from p to a polyline.
template <int D>
double distance_to_polyline(const std::vector<Vec<D>>& line, const Vec<D>& p) {
  if (line.empty()) return std::numeric_limits<double>::infinity();
  double best = (line.front() - p).norm();
  for (std::size_t i = 1; i < line.size(); ++i) {
    const Vec<D> a = line[i - 1];
    const Vec<D> ab = line[i] - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (a + t * ab - p).norm());
  }
  return best;
}

template <int D>
double distance_to_manifold(const Manifold<D>& m, const Vec<D>& p) {
  double best = (m.saddle - p).norm();
  for (const auto& b : m.branches) best = std::min(best, distance_to_polyline(b, p));
  return best;
}

}  // namespace isoreal::critical
