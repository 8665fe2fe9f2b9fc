#pragma once

#include "isoreal/critical.hpp"
#include "isoreal/flow.hpp"
#include "isoreal/potential.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace isoreal::portrait {

struct PortraitOptions {
  /// Seeds on a ring around each critical point (around the box centre when there is none).
  int ring_seeds = 24;
  /// Ring radius as a fraction of the smallest box half-width.
  double ring_radius = 0.5;
  double max_time = 50.0;
  double level = 0.0;
  /// Marching-squares resolution for the dashed equipotential.
  int contour_cells = 200;
  int width = 640;
  int height = 640;
  critical::SearchOptions search{};
};

/// Counts of the drawn elements, for checking the output without parsing SVG.
struct PortraitSummary {
  int trajectories = 0;
  int manifolds = 0;
  int contour_segments = 0;
  int annotations = 0;
  int critical_points = 0;
};

namespace detail {

class Canvas {
 public:
  Canvas(const Box<2>& box, int w, int h) : box_(box), w_(w), h_(h) {}

  std::string pt(const Vec<2>& p) const {
    const double sx = margin + (p[0] - box_.lo[0]) / (box_.hi[0] - box_.lo[0]) * (w_ - 2 * margin);
    const double sy = h_ - margin - (p[1] - box_.lo[1]) / (box_.hi[1] - box_.lo[1]) * (h_ - 2 * margin);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", sx, sy);
    return buf;
  }

  std::string polyline(const std::vector<Vec<2>>& pts, const std::string& cls) const {
    std::string s = "<polyline class=\"" + cls + "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) s += ' ';
      s += pt(pts[i]);
    }
    return s + "\"/>\n";
  }

  static constexpr double margin = 20.0;

 private:
  Box<2> box_;
  int w_, h_;
};

// Segments of {u = c} on a cells x cells grid.
inline std::vector<std::pair<Vec<2>, Vec<2>>> contour(const Potential<2>& u, const Box<2>& box, double c,
                                                     int cells) {
  const int n = cells + 1;
  std::vector<double> f(static_cast<std::size_t>(n) * n);
  auto node = [&](int i, int j) {
    return Vec<2>(box.lo[0] + (box.hi[0] - box.lo[0]) * i / cells, box.lo[1] + (box.hi[1] - box.lo[1]) * j / cells);
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double v;
      try {
        v = u.value(node(i, j)) - c;
      } catch (const DomainError&) {
        v = std::nan("");
      }
      f[j * n + i] = v;
    }
  std::vector<std::pair<Vec<2>, Vec<2>>> segs;
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      const int ci[4] = {i, i + 1, i + 1, i};
      const int cj[4] = {j, j, j + 1, j + 1};
      double v[4];
      bool finite = true;
      for (int k = 0; k < 4; ++k) {
        v[k] = f[cj[k] * n + ci[k]];
        finite = finite && std::isfinite(v[k]);
      }
      if (!finite) continue;
      std::vector<Vec<2>> cross;
      for (int k = 0; k < 4; ++k) {
        const int l = (k + 1) % 4;
        if ((v[k] < 0) == (v[l] < 0)) continue;
        const double s = v[k] / (v[k] - v[l]);
        cross.push_back(node(ci[k], cj[k]) + s * (node(ci[l], cj[l]) - node(ci[k], cj[k])));
      }
      if (cross.size() == 2) segs.emplace_back(cross[0], cross[1]);
      if (cross.size() == 4) {
        // saddle cell: pair by the centre value
        const double mid = 0.25 * (v[0] + v[1] + v[2] + v[3]);
        if ((mid < 0) == (v[0] < 0)) {
          segs.emplace_back(cross[0], cross[1]);
          segs.emplace_back(cross[2], cross[3]);
        } else {
          segs.emplace_back(cross[0], cross[3]);
          segs.emplace_back(cross[1], cross[2]);
        }
      }
    }
  }
  return segs;
}

inline std::vector<Vec<2>> run(const Potential<2>& u, const Vec<2>& x, flow::Direction dir, const Box<2>& box,
                               double max_time) {
  flow::Stops<2> stops;
  stops.box = box;
  stops.max_time = max_time;
  flow::Tolerances tol;
  tol.rtol = 1e-8;
  tol.atol = 1e-10;
  tol.max_step = 0.01 * box.diameter();
  std::vector<Vec<2>> pts;
  try {
    for (const auto& s : flow::integrate(u, x, dir, stops, tol).samples) pts.push_back(s.x);
  } catch (const DomainError&) {
  }
  return pts;
}

// Behaviour of the flow in the quadrant (sx, sy) around a degenerate point
// p: "sink" when forward trajectories from three rays in the quadrant come
// back to p, "source" when backward ones do, otherwise "hyperbolic".
inline std::string quadrant_behaviour(const Potential<2>& u, const Vec<2>& p, double sx, double sy, double r,
                                      const Box<2>& box, double max_time) {
  auto returns = [&](flow::Direction dir) {
    for (double a : {0.25, 0.5, 0.75}) {
      const double th = a * std::numbers::pi / 2;
      const Vec<2> x = p + r * Vec<2>(sx * std::cos(th), sy * std::sin(th));
      if (!box.contains(x)) return false;
      const auto line = run(u, x, dir, box, max_time);
      if (line.empty() || (line.back() - p).norm() > 0.1 * r) return false;
    }
    return true;
  };
  if (returns(flow::Direction::Forward)) return "sink";
  if (returns(flow::Direction::Backward)) return "source";
  return "hyperbolic";
}

}  // namespace detail

/// Phase portrait with trajectories from a seed ring, the traced manifolds of
/// each saddle and the dashed equipotential {u = level}. Quadrants around a
/// degenerate point are annotated with the local behaviour of the flow.
inline std::string render_svg(const Potential<2>& u, const Box<2>& box, const PortraitOptions& opt = {},
                              PortraitSummary* summary = nullptr) {
  if (opt.ring_seeds <= 0) throw InputError("portrait needs a non-empty seed ring");
  if (!(opt.ring_radius > 0.0)) throw InputError("portrait ring radius must be positive");
  PortraitSummary sum;
  const detail::Canvas cv(box, opt.width, opt.height);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
      << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n";
  svg << "<title>phase portrait of " << u.id() << "</title>\n";
  svg << "<style>.trajectory{fill:none;stroke:#888;stroke-width:0.8}"
         ".manifold{fill:none;stroke-width:2}.stable{stroke:#1f5fbf}.unstable{stroke:#c0392b}"
         ".equipotential{fill:none;stroke:#000;stroke-width:1.2;stroke-dasharray:6,4}"
         ".critical{stroke:#000}.annotation{font:12px sans-serif}</style>\n";
  svg << "<rect x=\"" << detail::Canvas::margin << "\" y=\"" << detail::Canvas::margin << "\" width=\""
      << opt.width - 2 * detail::Canvas::margin << "\" height=\"" << opt.height - 2 * detail::Canvas::margin
      << "\" fill=\"none\" stroke=\"#000\"/>\n";

  const auto pts = critical::find_critical_points(u, box, opt.search);
  sum.critical_points = static_cast<int>(pts.size());
  const double half = 0.5 * std::min(box.hi[0] - box.lo[0], box.hi[1] - box.lo[1]);
  const double radius = opt.ring_radius * half;

  std::vector<Vec<2>> centres;
  for (const auto& c : pts) centres.push_back(c.location);
  if (centres.empty()) centres.push_back(0.5 * (box.lo + box.hi));

  svg << "<g id=\"trajectories\">\n";
  for (const auto& c : centres) {
    for (int k = 0; k < opt.ring_seeds; ++k) {
      const double a = 2 * std::numbers::pi * (k + 0.5) / opt.ring_seeds;
      const Vec<2> x = c + radius * Vec<2>(std::cos(a), std::sin(a));
      if (!box.contains(x)) continue;
      auto back = detail::run(u, x, flow::Direction::Backward, box, opt.max_time);
      const auto fwd = detail::run(u, x, flow::Direction::Forward, box, opt.max_time);
      std::vector<Vec<2>> line(back.rbegin(), back.rend());
      if (!fwd.empty()) line.insert(line.end(), fwd.begin() + (line.empty() ? 0 : 1), fwd.end());
      if (line.size() < 2) continue;
      svg << cv.polyline(line, "trajectory");
      ++sum.trajectories;
    }
  }
  svg << "</g>\n<g id=\"manifolds\">\n";
  for (const auto& c : pts) {
    if (c.kind != critical::Kind::Saddle) continue;
    const auto m = critical::trace_manifolds(u, c, box);
    for (const auto* man : {&m.stable, &m.unstable}) {
      // both branches start at the saddle: join them through it
      std::vector<Vec<2>> line;
      if (!man->branches.empty()) line.assign(man->branches[0].rbegin(), man->branches[0].rend());
      for (std::size_t b = 1; b < man->branches.size(); ++b)
        line.insert(line.end(), man->branches[b].begin() + 1, man->branches[b].end());
      const std::string cls = std::string("manifold ") + critical::to_string(man->flavor);
      svg << cv.polyline(line, cls);
      ++sum.manifolds;
    }
  }
  svg << "</g>\n<g id=\"equipotential\">\n";
  const auto segs = detail::contour(u, box, opt.level, opt.contour_cells);
  if (!segs.empty()) {
    svg << "<path class=\"equipotential\" d=\"";
    for (const auto& [a, b] : segs) svg << 'M' << cv.pt(a) << 'L' << cv.pt(b);
    svg << "\"/>\n";
  }
  sum.contour_segments = static_cast<int>(segs.size());
  svg << "</g>\n<g id=\"critical-points\">\n";
  for (const auto& c : pts) {
    const auto p = cv.pt(c.location);
    const auto comma = p.find(',');
    svg << "<circle class=\"critical\" cx=\"" << p.substr(0, comma) << "\" cy=\"" << p.substr(comma + 1)
        << "\" r=\"4\" fill=\"" << (c.kind == critical::Kind::Saddle ? "#fff" : "#000") << "\"><title>"
        << critical::to_string(c.kind) << "</title></circle>\n";
  }
  svg << "</g>\n<g id=\"annotations\">\n";
  for (const auto& c : pts) {
    if (c.kind != critical::Kind::Degenerate) continue;
    for (int q = 0; q < 4; ++q) {
      const double sx = (q == 0 || q == 3) ? 1.0 : -1.0, sy = q < 2 ? 1.0 : -1.0;
      const auto what = detail::quadrant_behaviour(u, c.location, sx, sy, radius, box, opt.max_time);
      const auto at = cv.pt(c.location + 0.6 * radius * Vec<2>(sx, sy));
      const auto comma = at.find(',');
      svg << "<text class=\"annotation\" x=\"" << at.substr(0, comma) << "\" y=\"" << at.substr(comma + 1)
          << "\" text-anchor=\"middle\">" << what << " behavior in {" << (sx > 0 ? "x&gt;0" : "x&lt;0") << ','
          << (sy > 0 ? "y&gt;0" : "y&lt;0") << "}</text>\n";
      ++sum.annotations;
    }
  }
  svg << "</g>\n</svg>\n";
  if (summary) *summary = sum;
  return svg.str();
}

}  // namespace isoreal::portrait
