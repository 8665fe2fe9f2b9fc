#pragma once

#include "isoreal/catalog.hpp"
#include "isoreal/grid_potential.hpp"
#include "isoreal/potential.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace isoreal::config {

/// Every knob of a command-line run. Unset optionals defer to the default of
/// the analysis that consumes them.
struct RunConfig {
  std::string potential = "cos-saddle";
  /// Analysis box; the potential's domain when empty.
  std::vector<double> lo, hi;
  /// Nodes per axis, unless `spacing` is set.
  int resolution = 65;
  std::optional<double> spacing;
  /// Level c; u at the critical point nearest the box centre when unset.
  std::optional<double> level;
  std::string interpolation = "cubic";

  std::optional<double> rtol, atol, grad_floor, level_tol;
  double newton_residual = 1e-10;
  double eigen_threshold = 1e-7;
  int search_seeds = 12;
  std::optional<double> band;
  double div_factor = 3.0;
  double div_floor = 0.1;
  int div_run = 3;
  double div_r_squared = 0.9;
  bool check_div = false;

  int stages = 40;
  double anchor_fraction = 0.5;
  int k_min = 0;
  int k_max = 20;
  int samples = 5;
  std::vector<double> point;
  int bou_k_min = 4;
  int bou_k_max = 40;
  double side = 1.0;
  int torus_nodes = 65;

  std::vector<double> start;
  double t_max = 1.0;
  std::string direction = "forward";

  int ring_seeds = 24;
  double ring_radius = 0.5;
  double portrait_time = 50.0;
  int width = 640;
  int height = 640;

  int loops = 20;
  int cocycle_samples = 20;
  int trajectories = 10;
  double padding = 0.2;

  std::string out_dir = ".";
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

/// Calls f(name, member) for every field, in file order.
template <class C, class F>
void for_each_field(C& c, F&& f) {
  f("potential", c.potential);
  f("lo", c.lo);
  f("hi", c.hi);
  f("resolution", c.resolution);
  f("spacing", c.spacing);
  f("level", c.level);
  f("interpolation", c.interpolation);
  f("rtol", c.rtol);
  f("atol", c.atol);
  f("grad_floor", c.grad_floor);
  f("level_tol", c.level_tol);
  f("newton_residual", c.newton_residual);
  f("eigen_threshold", c.eigen_threshold);
  f("search_seeds", c.search_seeds);
  f("band", c.band);
  f("div_factor", c.div_factor);
  f("div_floor", c.div_floor);
  f("div_run", c.div_run);
  f("div_r_squared", c.div_r_squared);
  f("check_div", c.check_div);
  f("stages", c.stages);
  f("anchor_fraction", c.anchor_fraction);
  f("k_min", c.k_min);
  f("k_max", c.k_max);
  f("samples", c.samples);
  f("point", c.point);
  f("bou_k_min", c.bou_k_min);
  f("bou_k_max", c.bou_k_max);
  f("side", c.side);
  f("torus_nodes", c.torus_nodes);
  f("start", c.start);
  f("t_max", c.t_max);
  f("direction", c.direction);
  f("ring_seeds", c.ring_seeds);
  f("ring_radius", c.ring_radius);
  f("portrait_time", c.portrait_time);
  f("width", c.width);
  f("height", c.height);
  f("loops", c.loops);
  f("cocycle_samples", c.cocycle_samples);
  f("trajectories", c.trajectories);
  f("padding", c.padding);
  f("out_dir", c.out_dir);
  f("seed", c.seed);
  f("workers", c.workers);
}

using Json = nlohmann::ordered_json;

inline Json to_json(const RunConfig& c) {
  Json j = Json::object();
  for_each_field(c, [&](const char* name, const auto& v) {
    using T = std::decay_t<decltype(v)>;
    if constexpr (std::is_same_v<T, std::optional<double>>) j[name] = v ? Json(*v) : Json(nullptr);
    else j[name] = v;
  });
  return j;
}

/// Parse a config object. Unknown keys and wrong types are input errors;
/// missing keys keep their defaults.
inline RunConfig from_json(const Json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  RunConfig c;
  std::size_t known = 0;
  for_each_field(c, [&](const char* name, auto& v) {
    using T = std::decay_t<decltype(v)>;
    const auto it = j.find(name);
    if (it == j.end()) return;
    ++known;
    try {
      if constexpr (std::is_same_v<T, std::optional<double>>) {
        if (it->is_null()) v.reset();
        else v = it->template get<double>();
      } else {
        v = it->template get<T>();
      }
    } catch (const nlohmann::json::exception&) {
      throw InputError(std::string("config key '") + name + "' has the wrong type");
    }
  });
  if (known != j.size()) {
    for (const auto& [key, value] : j.items()) {
      bool found = false;
      for_each_field(c, [&](const char* name, const auto&) { found = found || key == name; });
      if (!found) throw InputError("unknown config key '" + key + "'");
    }
  }
  return c;
}

inline RunConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config file '" + path + "': " + e.what());
  }
  return from_json(j);
}

inline void validate(const RunConfig& c) {
  auto positive = [](std::optional<double> v, const char* name) {
    if (v && !(*v > 0.0)) throw InputError(std::string(name) + " must be positive");
  };
  if (c.resolution < 8) throw InputError("resolution must be at least 8 nodes per axis");
  positive(c.spacing, "spacing");
  positive(c.rtol, "rtol");
  positive(c.atol, "atol");
  positive(c.grad_floor, "grad_floor");
  positive(c.level_tol, "level_tol");
  positive(c.band, "band");
  positive(c.newton_residual, "newton_residual");
  positive(c.eigen_threshold, "eigen_threshold");
  positive(c.div_factor, "div_factor");
  positive(c.t_max, "t_max");
  if (c.lo.size() != c.hi.size()) throw InputError("lo and hi need the same number of coordinates");
  if (c.interpolation != "cubic" && c.interpolation != "linear")
    throw InputError("interpolation must be cubic or linear");
  if (c.direction != "forward" && c.direction != "backward")
    throw InputError("direction must be forward or backward");
  if (c.side != 1.0 && c.side != -1.0) throw InputError("side must be 1 or -1");
  if (c.stages < 3 || c.k_max < c.k_min || c.bou_k_max < c.bou_k_min)
    throw InputError("probe schedules need at least 3 stages");
}

/// Number with optional pi factors: "0.5", "-pi", "pi/100", "2*pi", "3pi/4".
inline double parse_length(std::string s) {
  const auto p = s.find("pi");
  if (p == std::string::npos) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw InputError("not a number: '" + s + "'");
    return v;
  }
  std::string pre = s.substr(0, p), post = s.substr(p + 2);
  if (!pre.empty() && pre.back() == '*') pre.pop_back();
  double v = std::numbers::pi;
  if (pre == "-") v = -v;
  else if (!pre.empty()) v *= parse_length(pre);
  if (!post.empty()) {
    if (post[0] != '/') throw InputError("not a number: '" + s + "'");
    v /= parse_length(post.substr(1));
  }
  return v;
}

using AnyPotential = std::variant<Potential<2>, Potential<3>>;

/// Catalog id, "separable:<preset or tokens>" or "grid:<csv file>".
inline AnyPotential resolve_potential(const std::string& spec, const std::string& interpolation = "cubic") {
  if (spec.rfind("separable:", 0) == 0) {
    const auto comps = catalog::parse_separable(spec.substr(10));
    if (comps.size() == 2) return make_separable<2>(comps, catalog::separable_box<2>(comps), spec);
    if (comps.size() == 3) return make_separable<3>(comps, catalog::separable_box<3>(comps), spec);
    throw InputError("separable spec needs 2 or 3 components");
  }
  if (spec.rfind("grid:", 0) == 0) {
    const std::string path = spec.substr(5);
    std::ifstream in(path);
    if (!in) throw InputError("cannot open grid file '" + path + "'");
    const auto csv = read_grid_csv(in);
    const auto order = interpolation == "linear" ? Interpolation::Linear : Interpolation::Cubic;
    if (csv.dimension == 2) return grid_potential_from_csv<2>(csv, order, spec);
    return grid_potential_from_csv<3>(csv, order, spec);
  }
  if (spec == "cos-saddle") return catalog::cos_saddle();
  if (spec == "cubic-degenerate") return catalog::cubic();
  if (spec == "counterexample-iii") return catalog::counterexample_iii();
  if (spec == "linear-xy") return catalog::linear<2>(Vec<2>(1.0, 1.0), "linear-xy");
  if (spec == "linear-x") return catalog::linear<2>(Vec<2>(1.0, 0.0), "linear-x");
  if (spec == "wavy-ramp") return catalog::wavy_ramp();
  if (spec == "quadratic-cap") return catalog::quadratic_cap<2>();
  if (spec == "saddle-3d") return catalog::saddle_3d();
  throw InputError("unknown potential '" + spec + "' (see list-potentials)");
}

/// Analysis box from lo/hi, or the potential's domain.
template <int D>
Box<D> box_of(const RunConfig& c, const Potential<D>& u) {
  if (c.lo.empty()) return u.domain();
  if (c.lo.size() != static_cast<std::size_t>(D))
    throw InputError("lo/hi need " + std::to_string(D) + " coordinates for " + u.id());
  Box<D> b;
  for (int i = 0; i < D; ++i) {
    b.lo[i] = c.lo[i];
    b.hi[i] = c.hi[i];
    if (!(b.hi[i] > b.lo[i])) throw InputError("box must have positive extent");
  }
  return b;
}

template <int D>
GridSpec<D> grid_of(const RunConfig& c, const Box<D>& b) {
  return c.spacing ? GridSpec<D>::with_spacing(b, *c.spacing) : GridSpec<D>(b, [&] {
    std::array<int, D> n{};
    n.fill(c.resolution);
    return n;
  }());
}

}  // namespace isoreal::config
