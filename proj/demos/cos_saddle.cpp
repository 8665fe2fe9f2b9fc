// Conductivity for u = cos x - cos y: classify the saddle, synthesize sigma
// on a grid and look at how well div(sigma grad u) vanishes.

#include "isoreal/catalog.hpp"
#include "isoreal/conductivity.hpp"
#include "isoreal/critical.hpp"
#include "isoreal/probes.hpp"

#include <cstdio>
#include <numbers>

using namespace isoreal;

int main() {
  const auto u = catalog::cos_saddle();
  const auto pts = critical::find_critical_points(u, u.domain());
  for (const auto& p : pts)
    std::printf("critical point (%g, %g): %s\n", p.location[0], p.location[1], critical::to_string(p.kind));

  const auto cp = critical::classify(u, Vec<2>::Zero());
  const auto m = critical::trace_manifolds(u, cp, u.domain());

  conductivity::SynthesisOptions<2> opt;
  opt.manifolds = {m.stable, m.unstable};
  opt.band = 0.15;
  const auto box = Box<2>::cube(-std::numbers::pi + 0.3, std::numbers::pi - 0.3);
  for (int n : {33, 65, 129}) {
    const GridSpec<2> g(box, {n, n});
    const auto f = conductivity::synthesize(u, g, 0.0, opt);
    const auto r = conductivity::divergence_residual(u, f);
    std::printf("n = %3d  max residual %.3e  (%zu nodes in the band)\n", n, r.max_abs, f.count(conductivity::NodeStatus::NearManifold));
  }

  const auto report = probes::probe_saddle_boundedness(u, cp, m, u.domain());
  std::printf("w near the saddle: %s\n", probes::to_string(report.verdict));
}
