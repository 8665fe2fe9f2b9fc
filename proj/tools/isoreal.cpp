// isoreal: command-line front end for conductivity synthesis, critical-point
// classification, realizability probes, phase portraits and rectification.
//
// Exit codes: 0 ok, 1 the analysis ran but its output is degraded, 2 bad
// usage or input.

#include "isoreal/catalog.hpp"
#include "isoreal/config.hpp"
#include "isoreal/io.hpp"
#include "isoreal/portrait.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

using namespace isoreal;
using config::RunConfig;
using io::Json;

namespace {

class OutDir {
 public:
  explicit OutDir(std::filesystem::path p) : path_(std::move(p)) {}

  std::ofstream open(const std::string& name) const {
    std::filesystem::create_directories(path_);
    std::ofstream f(path_ / name, std::ios::binary);
    if (!f) throw InputError("cannot write " + (path_ / name).string());
    std::cout << "wrote " << (path_ / name).string() << '\n';
    return f;
  }
  void json(const std::string& name, const Json& j) const { open(name) << j.dump(2) << '\n'; }

 private:
  std::filesystem::path path_;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <int D>
std::string fmt(const Vec<D>& x) {
  std::string s = "(";
  for (int i = 0; i < D; ++i) s += (i ? ", " : "") + fmt(x[i]);
  return s + ")";
}

template <int D>
Vec<D> vec_of(const std::vector<double>& v, const char* what) {
  if (v.size() != static_cast<std::size_t>(D))
    throw InputError(std::string(what) + " needs " + std::to_string(D) + " coordinates");
  Vec<D> x;
  for (int i = 0; i < D; ++i) x[i] = v[i];
  return x;
}

flow::Tolerances tolerances(const RunConfig& c, flow::Tolerances t = {}) {
  if (c.rtol) t.rtol = *c.rtol;
  if (c.atol) t.atol = *c.atol;
  return t;
}

probes::DivergenceRule rule_of(const RunConfig& c) {
  return {c.div_factor, c.div_floor, c.div_run, c.div_r_squared};
}

critical::SearchOptions search_of(const RunConfig& c) {
  critical::SearchOptions s;
  s.seeds = c.search_seeds;
  s.accept_residual = c.newton_residual;
  s.classify.rel_threshold = c.eigen_threshold;
  s.workers = c.workers;
  return s;
}

template <int D>
conductivity::SynthesisOptions<D> synthesis_of(const RunConfig& c) {
  conductivity::SynthesisOptions<D> s;
  s.tol = tolerances(c);
  if (c.grad_floor) s.grad_floor = *c.grad_floor;
  if (c.level_tol) s.level_tol = *c.level_tol;
  s.workers = c.workers;
  return s;
}

template <int D>
std::optional<critical::CriticalPoint<D>> nearest_critical(const std::vector<critical::CriticalPoint<D>>& pts,
                                                           const Vec<D>& centre, bool saddles_only = false) {
  std::optional<critical::CriticalPoint<D>> best;
  for (const auto& p : pts) {
    if (saddles_only && p.kind != critical::Kind::Saddle) continue;
    if (!best || (p.location - centre).norm() < (best->location - centre).norm()) best = p;
  }
  return best;
}

template <int D>
double level_of(const RunConfig& c, const Potential<D>& u, const Box<D>& box) {
  if (c.level) return *c.level;
  const auto cp = nearest_critical<D>(critical::find_critical_points(u, box, search_of(c)), box.center());
  return cp ? u.value(cp->location) : 0.0;
}

template <int D>
int cmd_classify(const RunConfig& c, const Potential<D>& u, const OutDir& out) {
  const Box<D> box = config::box_of(c, u);
  const auto pts = critical::find_critical_points(u, box, search_of(c));
  out.json("critical.json", io::critical_report<D>(u.id(), box, pts));
  std::cout << pts.size() << " critical point(s) of " << u.id() << '\n';
  for (const auto& p : pts)
    std::cout << "  " << critical::to_string(p.kind) << " at " << fmt<D>(p.location) << ", lap u = " << fmt(p.laplacian)
              << '\n';
  return 0;
}

template <int D>
int cmd_flow(const RunConfig& c, const Potential<D>& u, const OutDir& out) {
  const Box<D> box = config::box_of(c, u);
  const Vec<D> x0 = c.start.empty() ? box.center() : vec_of<D>(c.start, "start");
  flow::Stops<D> st;
  st.box = box;
  st.max_time = c.t_max;
  st.level = c.level;
  if (c.grad_floor) st.grad_floor = *c.grad_floor;
  const auto dir = c.direction == "forward" ? flow::Direction::Forward : flow::Direction::Backward;
  const auto tr = flow::integrate(u, x0, dir, st, tolerances(c));
  {
    auto os = out.open("trajectory.csv");
    io::write_trajectory_csv(os, tr);
  }
  out.json("trajectory.json", io::trajectory_json(tr, u.id()));
  std::cout << flow::termination_name<D>(tr.termination) << " at t = " << fmt(tr.back().t) << ", x = "
            << fmt<D>(tr.back().x) << ", W = " << fmt(tr.back().w) << '\n';
  return 0;
}

template <int D>
int cmd_synthesize(const RunConfig& c, const Potential<D>& u, const OutDir& out) {
  const Box<D> box = config::box_of(c, u);
  const auto grid = config::grid_of(c, box);
  const double level = level_of(c, u, box);
  auto opt = synthesis_of<D>(c);
  opt.box = box;
  opt.band = c.band;
  for (const auto& p : critical::find_critical_points(u, box, search_of(c))) {
    if (p.kind != critical::Kind::Saddle) continue;
    const auto m = critical::trace_manifolds(u, p, box);
    opt.manifolds.push_back(m.stable);
    opt.manifolds.push_back(m.unstable);
  }
  const auto f = conductivity::synthesize(u, grid, level, opt);
  {
    auto os = out.open("sigma.csv");
    io::write_field_csv(os, f);
  }
  Json report = io::field_summary(f);
  std::cout << f.count(conductivity::NodeStatus::Ok) << " of " << grid.size() << " nodes ok at level "
            << fmt(level) << '\n';
  int code = 0;
  if (c.check_div) {
    const auto coarse = conductivity::divergence_residual(u, f);
    const auto fine = conductivity::divergence_residual(u, conductivity::synthesize(u, grid.refined(), level, opt));
    report["divergence"] = Json{{"coarse", io::to_json<D>(coarse)}, {"fine", io::to_json<D>(fine)}};
    if (coarse.usable && fine.usable) {
      const auto e = conductivity::residual_order(coarse, fine);
      report["divergence"]["order"] = io::to_json(e);
      std::cout << "residual " << fmt(e.coarse) << " -> " << fmt(e.fine) << ", order " << fmt(e.order) << '\n';
    } else {
      std::cout << "residual report unusable: too few ok nodes\n";
      code = 1;
    }
  }
  out.json("sigma.json", report);
  return code;
}

int verdict_code(probes::Verdict v) { return v == probes::Verdict::Unusable ? 1 : 0; }

int cmd_probe_saddle(const RunConfig& c, const Potential<2>& u, const OutDir& out) {
  const Box<2> box = config::box_of(c, u);
  const auto sp = nearest_critical<2>(critical::find_critical_points(u, box, search_of(c)), box.center(), true);
  if (!sp) throw probes::ProbeRefused("no saddle of " + u.id() + " in the box");
  const auto m = critical::trace_manifolds(u, *sp, box);
  probes::SaddleProbeOptions opt;
  opt.stages = c.stages;
  opt.anchor_fraction = c.anchor_fraction;
  opt.level = c.level;
  opt.rule = rule_of(c);
  opt.synthesis = synthesis_of<2>(c);
  const auto r = probes::probe_saddle_boundedness(u, *sp, m, box, opt);
  const auto lap = critical::check_laplacian_vanishing<2>(u, sp->location);
  Json j{{"potential", u.id()}, {"saddle", io::to_json<2>(sp->location)}, {"laplacian", lap.value},
         {"laplacian_vanishes", lap.passes}};
  j.update(io::to_json(r));
  out.json("probe-saddle.json", j);
  std::cout << "saddle at " << fmt<2>(sp->location) << ": " << probes::to_string(r.verdict) << " (sup |w| = "
            << fmt(r.sup()) << ")\n";
  return verdict_code(r.verdict);
}

template <int D>
int cmd_probe_stable(const RunConfig& c, const Potential<D>& u, const OutDir& out) {
  const Box<D> qstar = config::box_of(c, u);
  Vec<D> p;
  if (!c.point.empty()) {
    p = vec_of<D>(c.point, "point");
  } else {
    // the point may sit on the boundary of Q*, so search the whole domain
    const auto cp = nearest_critical<D>(critical::find_critical_points(u, u.domain(), search_of(c)), qstar.center());
    if (!cp) throw probes::ProbeRefused("no critical point of " + u.id());
    p = cp->location;
  }
  probes::StableProbeOptions<D> opt;
  opt.k_min = c.k_min;
  opt.k_max = c.k_max;
  opt.samples = c.samples;
  opt.rule = rule_of(c);
  opt.tol = tolerances(c, opt.tol);
  if (c.grad_floor) opt.grad_floor = *c.grad_floor;
  opt.workers = c.workers;
  const auto r = probes::probe_stable_point<D>(u, p, qstar, opt);
  Json j{{"potential", u.id()}, {"point", io::to_json<D>(p)}, {"qstar", io::to_json<D>(qstar)}};
  j.update(io::to_json(r));
  out.json("probe-stable.json", j);
  std::cout << "point " << fmt<D>(p) << ": " << probes::to_string(r.verdict);
  if (r.best) std::cout << ", fit " << r.best->model << " R^2 = " << fmt(r.best->r_squared);
  std::cout << '\n';
  return verdict_code(r.verdict);
}

template <int D>
const std::array<Component1D, D>& components_of(const Potential<D>& u) {
  const auto* comps = u.components();
  if (!comps) throw InputError(u.id() + " is not separable");
  return *comps;
}

template <int D>
int cmd_probe_torus(const RunConfig& c, const Potential<D>& u, const OutDir& out) {
  const auto v = separable::analyze_separable_torus<D>(components_of(u), {c.torus_nodes});
  Json j{{"potential", u.id()}};
  j.update(io::to_json<D>(v));
  out.json("probe-torus.json", j);
  std::cout << u.id() << ": " << (v.realizable ? "realizable" : "not realizable")
            << (v.trajectories_bounded ? ", trajectories bounded" : "") << '\n';
  return v.realizable && !(v.divergence && v.divergence->usable) ? 1 : 0;
}

template <int D>
int cmd_probe_bouFG(const RunConfig& c, const Potential<D>& u, const OutDir& out) {
  separable::BouFGOptions opt;
  opt.k_min = c.bou_k_min;
  opt.k_max = c.bou_k_max;
  opt.sign = c.side;
  opt.rule = rule_of(c);
  Json list = Json::array();
  bool all = true;
  int code = 0;
  const auto& comps = components_of(u);
  for (int i = 0; i < D; ++i) {
    Json e{{"axis", io::axis_name(i)}, {"component", comps[i].name}};
    const double f2 = comps[i].d2f(0.0);
    if (f2 == 0.0 || !std::isfinite(f2)) {
      e["skipped"] = "second derivative at 0 is not a nonzero number";
      std::cout << io::axis_name(i) << ": skipped (f''(0) = " << fmt(f2) << ")\n";
    } else {
      const auto b = separable::check_bouFG(comps[i], opt);
      e.update(io::to_json(b));
      all = all && b.bounded;
      code = std::max(code, verdict_code(b.report.verdict));
      std::cout << io::axis_name(i) << ": " << (b.bounded ? "bounded" : "unbounded") << '\n';
    }
    list.push_back(e);
  }
  out.json("probe-bouFG.json", Json{{"potential", u.id()}, {"side", c.side}, {"components", list}, {"all_bounded", all}});
  return code;
}

int cmd_portrait(const RunConfig& c, const Potential<2>& u, const OutDir& out) {
  const Box<2> box = config::box_of(c, u);
  portrait::PortraitOptions opt;
  opt.ring_seeds = c.ring_seeds;
  opt.ring_radius = c.ring_radius;
  opt.max_time = c.portrait_time;
  opt.width = c.width;
  opt.height = c.height;
  opt.search = search_of(c);
  opt.level = level_of(c, u, box);
  portrait::PortraitSummary s;
  const auto svg = portrait::render_svg(u, box, opt, &s);
  out.open("portrait.svg") << svg;
  out.json("portrait.json", Json{{"potential", u.id()},
                                 {"box", io::to_json<2>(box)},
                                 {"level", opt.level},
                                 {"trajectories", s.trajectories},
                                 {"manifolds", s.manifolds},
                                 {"contour_segments", s.contour_segments},
                                 {"annotations", s.annotations},
                                 {"critical_points", s.critical_points}});
  std::cout << s.trajectories << " trajectories, " << s.manifolds << " manifolds, " << s.annotations
            << " annotations\n";
  return 0;
}

int cmd_rectify(const RunConfig& c, const Potential<2>& u, const OutDir& out) {
  const Box<2> box = config::box_of(c, u);
  const auto grid = config::grid_of(c, box);
  const auto nv = rectify::check_nonvanishing(u, grid);
  if (!nv.pass)
    throw InputError("rectify refused: |grad u| = " + fmt(nv.min_grad) + " at " + fmt<2>(nv.at) +
                     " (a critical point lies in the box)");
  rectify::TauOptions opt;
  opt.padding = c.padding;
  opt.tol = tolerances(c, opt.tol);
  if (c.grad_floor) opt.grad_floor = *c.grad_floor;
  if (c.level_tol) opt.level_tol = *c.level_tol;
  opt.workers = c.workers;
  const auto tf = rectify::tau_field(u, grid, opt);
  if (!tf.complete()) {
    out.json("rectify.json", Json{{"grid", io::to_json<2>(grid)}, {"min_grad_u", nv.min_grad},
                                  {"unreachable", tf.unreachable}, {"complete", false}});
    std::cout << tf.unreachable << " nodes never reach {u = 0}; no map built\n";
    return 1;
  }
  const auto sf = rectify::stream_v(u, tf, c.loops, c.seed);
  const auto m = rectify::build_phi_and_verify(tf, sf, u);
  const auto cc = rectify::check_cocycle(u, tf, c.cocycle_samples, c.seed, 0.5, opt);
  const auto fr = rectify::check_flow_rectification(u, m, c.trajectories, c.seed);
  {
    auto os = out.open("map.csv");
    io::write_map_csv(os, m);
  }
  out.json("rectify.json", io::rectify_diagnostics(m, sf, nv, cc, fr));
  std::cout << "max |dPhi grad u - e1| = " << fmt(m.max_dev_e1) << ", min |det| = " << fmt(m.min_abs_det)
            << ", circulation " << fmt(sf.circulation_max) << ", cocycle " << fmt(cc.max_error) << '\n';
  return 0;
}

int cmd_list() {
  std::cout << "catalog:\n";
  for (const auto& id : catalog::ids()) std::printf("  %-20s %s\n", id.c_str(), catalog::describe(id).c_str());
  std::cout << "separable:<preset> with preset one of:\n ";
  for (const auto& p : catalog::separable_presets()) std::cout << ' ' << p;
  std::cout << "\nseparable:<a>,<b>[,<c>] with components lin, sq<a>, onemcos, cosmone, mcos2pi, twopluscos, ciii\n"
               "grid:<file.csv> with header x,y,u or x,y,z,u\n";
  return 0;
}

// Options bound to a RunConfig of defaults; apply() copies those actually
// given on the command line onto a config loaded from file.
class Flags {
 public:
  Flags(CLI::App& app, RunConfig& given) : app_(app), given_(given) {}

  template <class T>
  CLI::Option* add(const std::string& name, T RunConfig::*m, const std::string& desc) {
    auto* o = app_.add_option(name, given_.*m, desc)->capture_default_str();
    track(o, m);
    return o;
  }
  CLI::Option* flag(const std::string& name, bool RunConfig::*m, const std::string& desc) {
    auto* o = app_.add_flag(name, given_.*m, desc);
    track(o, m);
    return o;
  }
  CLI::Option* number(const std::string& name, std::optional<double> RunConfig::*m, const std::string& desc) {
    auto* o = app_.add_option_function<std::string>(
        name, [this, m](const std::string& s) { given_.*m = length(s); }, desc);
    o->default_str("unset");
    track(o, m);
    return o;
  }
  CLI::Option* numbers(const std::string& name, std::vector<double> RunConfig::*m, const std::string& desc) {
    auto* o = app_.add_option_function<std::vector<std::string>>(
        name,
        [this, m](const std::vector<std::string>& v) {
          (given_.*m).clear();
          for (const auto& s : v) (given_.*m).push_back(length(s));
        },
        desc);
    o->delimiter(',')->allow_extra_args(false);
    track(o, m);
    return o;
  }

  void apply(RunConfig& dst) const {
    for (const auto& [o, copy] : set_)
      if (o->count() > 0) copy(dst);
  }

 private:
  // parse errors inside option callbacks must surface as CLI11 errors
  static double length(const std::string& s) {
    try {
      return config::parse_length(s);
    } catch (const InputError& e) {
      throw CLI::ValidationError(e.what());
    }
  }

  template <class T>
  void track(CLI::Option* o, T RunConfig::*m) {
    set_.emplace_back(o, [this, m](RunConfig& dst) { dst.*m = given_.*m; });
  }

  CLI::App& app_;
  RunConfig& given_;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> set_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isotropic realizability of gradient fields: hitting times, conductivities, probes"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.get_formatter()->column_width(34);

  RunConfig given;
  Flags f(app, given);
  std::string config_path;
  bool print_config = false;
  app.add_option("--config", config_path, "JSON run config; command-line flags override its keys");
  app.add_flag("--print-config", print_config, "print the effective config as JSON and exit");

  f.add("--potential,-p", &RunConfig::potential, "catalog id, separable:<spec> or grid:<file.csv>");
  f.numbers("--lo", &RunConfig::lo, "box lower corner, comma separated (default: potential domain)");
  f.numbers("--hi", &RunConfig::hi, "box upper corner, comma separated");
  f.add("--resolution,-n", &RunConfig::resolution, "grid nodes per axis (>= 8)");
  f.number("--spacing", &RunConfig::spacing, "grid spacing, overrides --resolution (accepts pi/100)");
  f.number("--level", &RunConfig::level, "level c (default: u at the critical point nearest the box centre)");
  f.add("--interpolation", &RunConfig::interpolation, "grid potential interpolation: cubic or linear");
  f.number("--rtol", &RunConfig::rtol, "flow relative tolerance");
  f.number("--atol", &RunConfig::atol, "flow absolute tolerance");
  f.number("--grad-floor", &RunConfig::grad_floor, "|grad u| below which a trajectory counts as converged");
  f.number("--level-tol", &RunConfig::level_tol, "accepted |u(hit) - c| relative to 1 + |c|");
  f.add("--newton-residual", &RunConfig::newton_residual, "accepted |grad u| at a critical point");
  f.add("--eigen-threshold", &RunConfig::eigen_threshold, "relative threshold for zero Hessian eigenvalues");
  f.add("--search-seeds", &RunConfig::search_seeds, "critical-point search seeds per axis");
  f.number("--band", &RunConfig::band, "near-manifold exclusion band (default: 2 h)");
  f.add("--div-factor", &RunConfig::div_factor, "probe divergence: growth factor over the first stage");
  f.add("--div-floor", &RunConfig::div_floor, "probe divergence: floor for the first-stage value");
  f.add("--div-run", &RunConfig::div_run, "probe divergence: trailing stages that must grow");
  f.add("--div-r2", &RunConfig::div_r_squared, "probe divergence: minimum R^2 of the growth fit");
  f.flag("--check-div", &RunConfig::check_div, "synthesize: residual at h and h/2 with order estimate");
  f.add("--stages", &RunConfig::stages, "saddle probe: stages at distance 2^-k");
  f.add("--anchor-fraction", &RunConfig::anchor_fraction, "saddle probe: anchor distance / box half-width");
  f.add("--k-min", &RunConfig::k_min, "stable probe: first time 2^k");
  f.add("--k-max", &RunConfig::k_max, "stable probe: last time 2^k");
  f.add("--samples", &RunConfig::samples, "stable probe: samples per axis of Q*");
  f.numbers("--point", &RunConfig::point, "stable probe: critical point (default: nearest the box centre)");
  f.add("--bou-k-min", &RunConfig::bou_k_min, "bouFG probe: first x = 2^-k");
  f.add("--bou-k-max", &RunConfig::bou_k_max, "bouFG probe: last x = 2^-k");
  f.add("--side", &RunConfig::side, "bouFG probe: side of the axis, 1 or -1");
  f.add("--torus-nodes", &RunConfig::torus_nodes, "torus probe: sigma nodes per axis of the cell");
  f.numbers("--start", &RunConfig::start, "flow: start point (default: box centre)");
  f.add("--t-max", &RunConfig::t_max, "flow: integration time");
  f.add("--direction", &RunConfig::direction, "flow: forward or backward");
  f.add("--ring-seeds", &RunConfig::ring_seeds, "portrait: seeds on the ring around each critical point");
  f.add("--ring-radius", &RunConfig::ring_radius, "portrait: ring radius / box half-width");
  f.add("--portrait-time", &RunConfig::portrait_time, "portrait: integration time per trajectory");
  f.add("--width", &RunConfig::width, "portrait: SVG width");
  f.add("--height", &RunConfig::height, "portrait: SVG height");
  f.add("--loops", &RunConfig::loops, "rectify: random loops for the circulation check");
  f.add("--cocycle-samples", &RunConfig::cocycle_samples, "rectify: samples for the cocycle check");
  f.add("--trajectories", &RunConfig::trajectories, "rectify: trajectories for the flow check");
  f.add("--padding", &RunConfig::padding, "rectify: integration box padding per side");
  f.add("--out-dir,-o", &RunConfig::out_dir, "directory for every output file");
  f.add("--seed", &RunConfig::seed, "seed for random sample points");
  f.add("--workers,-j", &RunConfig::workers, "worker threads (0: all cores)");

  auto* classify = app.add_subcommand("classify", "find and classify critical points");
  auto* flow_cmd = app.add_subcommand("flow", "integrate one gradient-flow trajectory");
  auto* synth = app.add_subcommand("synthesize", "sigma = exp(w) on a grid, optionally with a divergence check");
  auto* probe = app.add_subcommand("probe", "realizability probes");
  probe->require_subcommand(1)->fallthrough();
  auto* p_saddle = probe->add_subcommand("saddle", "boundedness of w near a 2-D saddle");
  auto* p_stable = probe->add_subcommand("stable", "growth of int lap u at a sink, source or degenerate point");
  auto* p_torus = probe->add_subcommand("torus", "realizability of a periodic separable gradient");
  auto* p_bou = probe->add_subcommand("bouFG", "F(x) - ln|x| / f''(0) near 0 for each separable component");
  auto* portrait_cmd = app.add_subcommand("portrait", "SVG phase portrait (2-D)");
  auto* rectify_cmd = app.add_subcommand("rectify", "rectifying map (-tau, v) with diagnostics (2-D)");
  auto* list = app.add_subcommand("list-potentials", "list catalog ids and potential specs");
  for (auto* s : {p_saddle, p_stable, p_torus, p_bou}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : config::load(config_path);
    f.apply(cfg);
    config::validate(cfg);
    if (print_config) {
      std::cout << config::to_json(cfg).dump(2) << '\n';
      return 0;
    }
    if (list->parsed()) return cmd_list();
    if (app.get_subcommands().empty()) throw InputError("a subcommand is required (see --help)");

    const auto pot = config::resolve_potential(cfg.potential, cfg.interpolation);
    const OutDir out(cfg.out_dir);
    const auto two_d = [&](const char* what) -> const Potential<2>& {
      if (const auto* u = std::get_if<Potential<2>>(&pot)) return *u;
      throw InputError(std::string(what) + " needs a 2-D potential");
    };

    int code = 0;
    if (portrait_cmd->parsed()) code = cmd_portrait(cfg, two_d("portrait"), out);
    else if (rectify_cmd->parsed()) code = cmd_rectify(cfg, two_d("rectify"), out);
    else if (p_saddle->parsed()) code = cmd_probe_saddle(cfg, two_d("the saddle probe"), out);
    else
      code = std::visit(
          [&](const auto& u) {
            constexpr int D = std::decay_t<decltype(u)>::dimension;
            if (classify->parsed()) return cmd_classify<D>(cfg, u, out);
            if (flow_cmd->parsed()) return cmd_flow<D>(cfg, u, out);
            if (synth->parsed()) return cmd_synthesize<D>(cfg, u, out);
            if (p_stable->parsed()) return cmd_probe_stable<D>(cfg, u, out);
            if (p_torus->parsed()) return cmd_probe_torus<D>(cfg, u, out);
            return cmd_probe_bouFG<D>(cfg, u, out);
          },
          pot);
    out.json("config.json", config::to_json(cfg));
    return code;
  } catch (const InputError& e) {
    std::cerr << "isoreal: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "isoreal: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "isoreal: evaluation failed: " << e.what() << '\n';
    return 1;
  }
}
