#pragma once

#include "isoreal/conductivity.hpp"
#include "isoreal/critical.hpp"
#include "isoreal/flow.hpp"
#include "isoreal/probes.hpp"
#include "isoreal/rectify.hpp"
#include "isoreal/separable.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace isoreal::io {

using Json = nlohmann::ordered_json;

/// Shortest text that round-trips; "nan" for NaN.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <int D>
Json to_json(const Vec<D>& v) {
  Json a = Json::array();
  for (int i = 0; i < D; ++i) a.push_back(v[i]);
  return a;
}

template <int D>
Json to_json(const Box<D>& b) {
  return Json{{"lo", to_json<D>(b.lo)}, {"hi", to_json<D>(b.hi)}};
}

template <int D>
Json to_json(const GridSpec<D>& g) {
  Json n = Json::array();
  for (int i = 0; i < D; ++i) n.push_back(g.n[i]);
  Json h = Json::array();
  for (int i = 0; i < D; ++i) h.push_back(g.spacing(i));
  return Json{{"box", to_json<D>(g.box)}, {"n", n}, {"h", h}};
}

inline const char* axis_name(int i) { return i == 0 ? "x" : i == 1 ? "y" : "z"; }

// ---------------------------------------------------------------------------
// trajectories

template <int D>
void write_trajectory_csv(std::ostream& os, const flow::Trajectory<D>& tr) {
  os << "t";
  for (int i = 0; i < D; ++i) os << ',' << axis_name(i);
  os << ",u,W\n";
  for (const auto& s : tr.samples) {
    os << num(s.t);
    for (int i = 0; i < D; ++i) os << ',' << num(s.x[i]);
    os << ',' << num(s.u) << ',' << num(s.w) << '\n';
  }
}

template <int D>
Json trajectory_json(const flow::Trajectory<D>& tr, const std::string& potential_id) {
  Json j{{"potential", potential_id},
         {"direction", flow::to_string(tr.direction)},
         {"termination", flow::termination_name<D>(tr.termination)},
         {"samples", tr.samples.size()},
         {"accepted_steps", tr.accepted_steps},
         {"rejected_steps", tr.rejected_steps}};
  if (!tr.samples.empty()) {
    j["start"] = to_json<D>(tr.samples.front().x);
    j["end"] = to_json<D>(tr.back().x);
    j["t_end"] = tr.back().t;
    j["W_end"] = tr.back().w;
  }
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, flow::HitLevel<D>>) {
          j["level"] = t.level;
          j["tau"] = t.tau;
          j["hit_point"] = to_json<D>(t.point);
        } else if constexpr (std::is_same_v<T, flow::CriticalConvergence<D>>) {
          j["limit"] = to_json<D>(t.limit);
        } else if constexpr (std::is_same_v<T, flow::DomainExit>) {
          j["exit_axis"] = t.axis;
          j["exit_side"] = t.side;
        }
      },
      tr.termination);
  return j;
}

// ---------------------------------------------------------------------------
// critical points

template <int D>
Json to_json(const critical::CriticalPoint<D>& c) {
  Json ev = Json::array();
  for (int i = 0; i < D; ++i) ev.push_back(to_json<D>(c.eigenvectors.col(i)));
  return Json{{"location", to_json<D>(c.location)},
              {"residual", c.residual},
              {"eigenvalues", to_json<D>(c.eigenvalues)},
              {"eigenvectors", ev},
              {"class", critical::to_string(c.kind)},
              {"laplacian", c.laplacian},
              {"isolation_radius", c.isolation_radius}};
}

template <int D>
Json critical_report(const std::string& potential_id, const Box<D>& box,
                     const std::vector<critical::CriticalPoint<D>>& pts) {
  Json list = Json::array();
  for (const auto& c : pts) list.push_back(to_json<D>(c));
  return Json{{"potential", potential_id}, {"box", to_json<D>(box)}, {"count", pts.size()}, {"critical_points", list}};
}

// ---------------------------------------------------------------------------
// conductivity

template <int D>
void write_field_csv(std::ostream& os, const conductivity::ConductivityField<D>& f) {
  for (int i = 0; i < D; ++i) os << axis_name(i) << ',';
  os << "tau,w,sigma,status\n";
  for (std::size_t idx = 0; idx < f.grid.size(); ++idx) {
    const Vec<D> x = f.grid.node(idx);
    for (int i = 0; i < D; ++i) os << num(x[i]) << ',';
    os << num(f.tau[idx]) << ',' << num(f.w[idx]) << ',' << num(f.sigma[idx]) << ','
       << conductivity::to_string(f.status[idx]) << '\n';
  }
}

template <int D>
Json field_summary(const conductivity::ConductivityField<D>& f) {
  Json counts;
  for (auto s : {conductivity::NodeStatus::Ok, conductivity::NodeStatus::NoHit,
                 conductivity::NodeStatus::NearManifold, conductivity::NodeStatus::Outside})
    counts[conductivity::to_string(s)] = f.count(s);
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < f.sigma.size(); ++i) {
    if (f.status[i] != conductivity::NodeStatus::Ok) continue;
    lo = std::min(lo, f.sigma[i]);
    hi = std::max(hi, f.sigma[i]);
  }
  Json j{{"potential", f.potential_id}, {"level", f.level}, {"grid", to_json<D>(f.grid)}, {"status_counts", counts}};
  if (lo <= hi) {
    j["sigma_min"] = lo;
    j["sigma_max"] = hi;
  }
  return j;
}

template <int D>
Json to_json(const conductivity::DivergenceReport<D>& r) {
  double h = 0.0;
  for (int i = 0; i < D; ++i) h = std::max(h, r.grid.spacing(i));
  return Json{{"h", h},
              {"max_abs", r.max_abs},
              {"l2", r.l2},
              {"evaluated", r.evaluated},
              {"interior", r.interior},
              {"usable", r.usable},
              {"excluded", r.excluded}};
}

inline Json to_json(const conductivity::OrderEstimate& e) {
  return Json{{"coarse_max", e.coarse}, {"fine_max", e.fine}, {"order", e.order}, {"common_nodes", e.common}};
}

// ---------------------------------------------------------------------------
// probes

inline Json to_json(const probes::GrowthFit& f) {
  return Json{{"model", f.model}, {"intercept", f.intercept}, {"slope", f.slope}, {"r_squared", f.r_squared}};
}

inline Json to_json(const probes::ProbeReport& r) {
  Json schedule = Json::array(), values = Json::array(), samples = Json::array(), fits = Json::array();
  for (const auto& s : r.stages) {
    schedule.push_back(s.parameter);
    values.push_back(s.value);
    samples.push_back(s.samples);
  }
  for (const auto& f : r.fits) fits.push_back(to_json(f));
  Json j{{"kind", probes::to_string(r.kind)},
         {"parameter", r.parameter_name},
         {"schedule", schedule},
         {"values", values},
         {"samples", samples},
         {"sup", r.sup()},
         {"threshold", r.threshold},
         {"fits", fits},
         {"fit", r.best ? to_json(*r.best) : Json(nullptr)},
         {"verdict", probes::to_string(r.verdict)}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline Json to_json(const separable::BouFGReport& b) {
  Json j = to_json(b.report);
  j["raw"] = b.raw;
  j["bounded"] = b.bounded;
  j["sup_estimate"] = b.sup_estimate;
  return j;
}

template <int D>
Json to_json(const separable::TorusVerdict<D>& v) {
  Json zeros = Json::array(), declared = Json::array();
  for (int i = 0; i < D; ++i) {
    zeros.push_back(v.zeros[i]);
    declared.push_back(v.declared[i]);
  }
  Json j{{"kind", "torus-C2Rd"},
         {"zeros", zeros},
         {"zeros_declared", declared},
         {"trajectories_bounded", v.trajectories_bounded},
         {"product_nonvanishing", v.product_nonvanishing},
         {"realizable", v.realizable}};
  if (v.sigma) j["sigma"] = field_summary<D>(*v.sigma);
  if (v.divergence) j["divergence"] = to_json<D>(*v.divergence);
  if (v.order) j["order"] = to_json(*v.order);
  return j;
}

// ---------------------------------------------------------------------------
// rectification

inline void write_map_csv(std::ostream& os, const rectify::RectificationMap& m) {
  os << "x,y,tau,v\n";
  for (std::size_t i = 0; i < m.grid.size(); ++i) {
    const Vec<2> x = m.grid.node(i);
    os << num(x[0]) << ',' << num(x[1]) << ',' << num(m.tau[i]) << ',' << num(m.v[i]) << '\n';
  }
}

inline Json rectify_diagnostics(const rectify::RectificationMap& m, const rectify::StreamFunction& s,
                                const rectify::NonvanishingCheck& nv, const rectify::CocycleCheck& cc,
                                const rectify::FlowRectification& fr) {
  return Json{{"grid", to_json<2>(m.grid)},
              {"max_dev_e1", m.max_dev_e1},
              {"max_dev_tau", m.max_dev_tau},
              {"max_dev_v", m.max_dev_v},
              {"min_abs_det", m.min_abs_det},
              {"min_grad_v", m.min_grad_v},
              {"circulation_max", s.circulation_max},
              {"circulation_loops", s.loops},
              {"v_base", to_json<2>(s.base)},
              {"min_grad_u", nv.min_grad},
              {"cocycle_max", cc.max_error},
              {"cocycle_samples", cc.samples},
              {"flow_rectification_max", fr.max_error},
              {"flow_rectification_trajectories", fr.trajectories}};
}

}  // namespace isoreal::io
