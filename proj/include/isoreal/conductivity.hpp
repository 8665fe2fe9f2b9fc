#pragma once

#include "isoreal/critical.hpp"
#include "isoreal/flow.hpp"
#include "isoreal/parallel.hpp"
#include "isoreal/potential.hpp"
#include "isoreal/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

namespace isoreal::conductivity {

enum class NodeStatus { Ok, NoHit, NearManifold, Outside };

inline const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Ok: return "ok";
    case NodeStatus::NoHit: return "no-hit";
    case NodeStatus::NearManifold: return "near-manifold";
    case NodeStatus::Outside: return "outside";
  }
  return "?";
}

/// w and sigma = e^w on a grid, with a status tag per node.
/// tau, w and sigma are NaN wherever they were not computed.
template <int D>
struct ConductivityField {
  GridSpec<D> grid;
  double level = 0.0;
  std::string potential_id;
  std::vector<double> tau;
  std::vector<double> w;
  std::vector<double> sigma;
  std::vector<NodeStatus> status;

  std::size_t count(NodeStatus s) const {
    return static_cast<std::size_t>(std::count(status.begin(), status.end(), s));
  }
};

template <int D>
struct SynthesisOptions {
  /// Traced manifolds; nodes closer than `band` are tagged near-manifold.
  std::vector<critical::Manifold<D>> manifolds;
  /// Exclusion band around the manifolds; 2 h (largest spacing) when unset.
  std::optional<double> band;
  /// Integration box; the potential's domain when unset.
  std::optional<Box<D>> box;
  flow::Tolerances tol{};
  double grad_floor = 1e-9;
  double max_time = 1e6;
  /// Accepted |u(hit) - c| is level_tol * (1 + |c|).
  double level_tol = 1e-10;
  unsigned workers = 1;
};

template <int D>
struct NodeValue {
  NodeStatus status = NodeStatus::Outside;
  flow::HitStatus hit = flow::HitStatus::MaxTime;
  double tau = std::numeric_limits<double>::quiet_NaN();
  double w = std::numeric_limits<double>::quiet_NaN();
};

/// tau and w = int_0^tau lap u for a single point (no manifold tagging).
template <int D>
NodeValue<D> node_value(const Potential<D>& u, const std::type_identity_t<Vec<D>>& x, double level,
                        const SynthesisOptions<D>& opt = {}) {
  NodeValue<D> r;
  const Box<D> box = opt.box ? *opt.box : u.domain();
  if (!box.contains(x)) return r;
  flow::Stops<D> stops;
  stops.box = box;
  stops.grad_floor = opt.grad_floor;
  stops.max_time = opt.max_time;
  flow::HittingResult<D> h;
  try {
    h = flow::hitting_time(u, x, level, stops, opt.tol);
  } catch (const DomainError&) {
    return r;
  }
  r.hit = h.status;
  if (h.hit() && std::abs(h.level_residual) <= opt.level_tol * (1.0 + std::abs(level))) {
    r.status = NodeStatus::Ok;
    r.tau = h.tau;
    r.w = h.w;
  } else {
    r.status = NodeStatus::NoHit;
  }
  return r;
}

/// sigma = e^w from hitting times toward {u = level} at every grid node.
template <int D>
ConductivityField<D> synthesize(const Potential<D>& u, const GridSpec<D>& grid, double level,
                                const SynthesisOptions<D>& opt = {}) {
  ConductivityField<D> f;
  f.grid = grid;
  f.level = level;
  f.potential_id = u.id();
  const std::size_t n = grid.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  f.tau.assign(n, nan);
  f.w.assign(n, nan);
  f.sigma.assign(n, nan);
  f.status.assign(n, NodeStatus::Outside);

  double hmax = 0.0;
  for (int i = 0; i < D; ++i) hmax = std::max(hmax, grid.spacing(i));
  const double band = opt.band ? *opt.band : 2.0 * hmax;

  parallel_for(n, opt.workers, [&](std::size_t idx) {
    const Vec<D> x = grid.node(idx);
    const auto v = node_value<D>(u, x, level, opt);
    f.status[idx] = v.status;
    if (v.status == NodeStatus::Outside) return;
    bool near = false;
    for (const auto& m : opt.manifolds)
      if (critical::distance_to_manifold(m, x) < band) near = true;
    if (v.status == NodeStatus::Ok) {
      f.tau[idx] = v.tau;
      f.w[idx] = v.w;
      f.sigma[idx] = std::exp(v.w);
    }
    if (near) f.status[idx] = NodeStatus::NearManifold;
  });
  return f;
}

/// Field from a known conductivity. Nodes where sigma is not finite and
/// positive are tagged outside.
template <int D>
ConductivityField<D> field_from_function(const GridSpec<D>& grid,
                                         const std::function<double(const Vec<D>&)>& sigma,
                                         std::string potential_id = {}, double level = 0.0) {
  ConductivityField<D> f;
  f.grid = grid;
  f.level = level;
  f.potential_id = std::move(potential_id);
  const std::size_t n = grid.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  f.tau.assign(n, nan);
  f.w.assign(n, nan);
  f.sigma.assign(n, nan);
  f.status.assign(n, NodeStatus::Outside);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const double s = sigma(grid.node(idx));
    if (std::isfinite(s) && s > 0.0) {
      f.sigma[idx] = s;
      f.w[idx] = std::log(s);
      f.status[idx] = NodeStatus::Ok;
    }
  }
  return f;
}

template <int D>
struct DivergenceReport {
  GridSpec<D> grid;
  /// div(sigma grad u) by flux differences; NaN outside the ok-stencil set.
  std::vector<double> residual;
  double max_abs = 0.0;
  /// sqrt(h^D * sum r^2) over evaluated nodes.
  double l2 = 0.0;
  std::size_t evaluated = 0;
  std::size_t interior = 0;
  bool usable = false;
  std::string excluded;
};

/// Discrete div(sigma grad u) at interior nodes whose full stencil is ok.
/// Face fluxes are mean(sigma) times grad u at the face midpoint.
template <int D>
DivergenceReport<D> divergence_residual(const Potential<D>& u, const ConductivityField<D>& f) {
  DivergenceReport<D> r;
  const auto& g = f.grid;
  r.grid = g;
  r.residual.assign(g.size(), std::numeric_limits<double>::quiet_NaN());
  double sumsq = 0.0;
  double cell = 1.0;
  for (int i = 0; i < D; ++i) cell *= g.spacing(i);

  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto ijk = g.multi_index(idx);
    bool interior = true;
    for (int i = 0; i < D; ++i)
      if (ijk[i] == 0 || ijk[i] == g.n[i] - 1) interior = false;
    if (!interior) continue;
    ++r.interior;
    if (f.status[idx] != NodeStatus::Ok) continue;
    bool ok = true;
    for (int i = 0; i < D && ok; ++i) {
      for (int s : {-1, 1}) {
        auto nb = ijk;
        nb[i] += s;
        if (f.status[g.index(nb)] != NodeStatus::Ok) ok = false;
      }
    }
    if (!ok) continue;
    const Vec<D> x = g.node(ijk);
    double div = 0.0;
    for (int i = 0; i < D; ++i) {
      const double h = g.spacing(i);
      auto hi = ijk, lo = ijk;
      ++hi[i];
      --lo[i];
      Vec<D> fh = x, fl = x;
      fh[i] += 0.5 * h;
      fl[i] -= 0.5 * h;
      const double flux_hi = 0.5 * (f.sigma[idx] + f.sigma[g.index(hi)]) * u.gradient(fh)[i];
      const double flux_lo = 0.5 * (f.sigma[idx] + f.sigma[g.index(lo)]) * u.gradient(fl)[i];
      div += (flux_hi - flux_lo) / h;
    }
    r.residual[idx] = div;
    r.max_abs = std::max(r.max_abs, std::abs(div));
    sumsq += div * div;
    ++r.evaluated;
  }
  r.l2 = std::sqrt(cell * sumsq);
  r.usable = r.interior > 0 && 10 * r.evaluated >= r.interior;
  const std::size_t excluded_nodes = r.interior - r.evaluated;
  r.excluded = std::to_string(excluded_nodes) + " of " + std::to_string(r.interior) +
               " interior nodes lack a full ok stencil (" +
               std::to_string(f.count(NodeStatus::NearManifold)) + " near-manifold, " +
               std::to_string(f.count(NodeStatus::NoHit)) + " no-hit, " +
               std::to_string(f.count(NodeStatus::Outside)) + " outside)";
  return r;
}

struct OrderEstimate {
  double coarse = 0.0;
  double fine = 0.0;
  double order = std::numeric_limits<double>::quiet_NaN();
  std::size_t common = 0;
};

/// Convergence order from residuals on a grid and its refinement, using the
/// max norm over nodes present and evaluated on both grids.
template <int D>
OrderEstimate residual_order(const DivergenceReport<D>& coarse, const DivergenceReport<D>& fine) {
  for (int i = 0; i < D; ++i)
    if (fine.grid.n[i] != 2 * (coarse.grid.n[i] - 1) + 1)
      throw InputError("residual_order needs a grid and its refinement");
  OrderEstimate e;
  for (std::size_t idx = 0; idx < coarse.grid.size(); ++idx) {
    auto ijk = coarse.grid.multi_index(idx);
    const double rc = coarse.residual[idx];
    for (int i = 0; i < D; ++i) ijk[i] *= 2;
    const double rf = fine.residual[fine.grid.index(ijk)];
    if (std::isnan(rc) || std::isnan(rf)) continue;
    e.coarse = std::max(e.coarse, std::abs(rc));
    e.fine = std::max(e.fine, std::abs(rf));
    ++e.common;
  }
  if (e.common > 0 && e.fine > 0.0 && e.coarse > 0.0) e.order = std::log2(e.coarse / e.fine);
  return e;
}

}  // namespace isoreal::conductivity
