// The separable counterexample: lap u(0) = 0 at the saddle, yet w grows like
// ln|F(x)| along the stable manifold, so no bounded conductivity exists.

#include "isoreal/catalog.hpp"
#include "isoreal/conductivity.hpp"
#include "isoreal/counterexample.hpp"
#include "isoreal/critical.hpp"
#include "isoreal/probes.hpp"

#include <cmath>
#include <cstdio>

using namespace isoreal;

int main() {
  const auto u = catalog::counterexample_iii();
  const auto lap = critical::check_laplacian_vanishing<2>(u, Vec<2>::Zero());
  std::printf("lap u(0, 0) = %g\n", lap.value);

  std::printf("%10s %14s %14s\n", "x", "w(x, 0.5)", "ln|F(x)|");
  for (double x : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12}) {
    const auto v = conductivity::node_value<2>(u, Vec<2>(x, 0.5), 0.0);
    std::printf("%10.0e %14.6f %14.6f\n", x, v.w, std::log(std::abs(counterexample::F(x))));
  }

  const auto cp = critical::classify(u, Vec<2>::Zero());
  const auto r = probes::probe_saddle_boundedness(u, cp, critical::trace_manifolds(u, cp, u.domain()), u.domain());
  std::printf("probe: %s", probes::to_string(r.verdict));
  if (r.best) std::printf(", growth like %s (R^2 %.4f)", r.best->model.c_str(), r.best->r_squared);
  std::printf("\n");
}
