// Straighten the flow of u = x + 0.3 sin y: Phi = (-tau, v) sends grad u to e1.
// Also writes a phase portrait to wavy.svg.

#include "isoreal/catalog.hpp"
#include "isoreal/portrait.hpp"
#include "isoreal/rectify.hpp"

#include <cstdio>
#include <fstream>

using namespace isoreal;

int main() {
  const auto u = catalog::wavy_ramp();
  const auto box = Box<2>::cube(-2.0, 2.0);
  for (double h : {1.0 / 25, 1.0 / 50, 1.0 / 100}) {
    const auto tf = rectify::tau_field(u, GridSpec<2>::with_spacing(box, h));
    const auto m = rectify::build_phi_and_verify(tf, rectify::stream_v(u, tf), u);
    std::printf("h = 1/%-3.0f  max |DPhi grad u - e1| %.3e  min |det DPhi| %.3f\n", 1 / h, m.max_dev_e1, m.min_abs_det);
  }

  portrait::PortraitSummary s;
  std::ofstream("wavy.svg") << portrait::render_svg(u, box, {}, &s);
  std::printf("wrote wavy.svg (%d trajectories)\n", s.trajectories);
}
