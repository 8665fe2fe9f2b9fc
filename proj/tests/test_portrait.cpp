#include "isoreal/catalog.hpp"
#include "isoreal/io.hpp"
#include "isoreal/portrait.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace isoreal;

namespace {

std::size_t occurrences(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Portrait, CosSaddleElements) {
  const auto u = catalog::cos_saddle();
  portrait::PortraitSummary s;
  const auto svg = portrait::render_svg(u, u.domain(), {}, &s);
  EXPECT_EQ(s.critical_points, 1);
  EXPECT_EQ(s.manifolds, 2);
  EXPECT_GE(s.trajectories, 16);
  EXPECT_EQ(occurrences(svg, "class=\"manifold stable\""), 1u);
  EXPECT_EQ(occurrences(svg, "class=\"manifold unstable\""), 1u);
  EXPECT_EQ(occurrences(svg, "class=\"trajectory\""), static_cast<std::size_t>(s.trajectories));
  EXPECT_EQ(occurrences(svg, "class=\"equipotential\""), 1u);
  EXPECT_GT(s.contour_segments, 0);
  EXPECT_EQ(s.annotations, 0);
}

TEST(Portrait, CubicQuadrantAnnotations) {
  const auto u = catalog::cubic();
  portrait::PortraitSummary s;
  const auto svg = portrait::render_svg(u, u.domain(), {}, &s);
  EXPECT_EQ(s.annotations, 4);
  EXPECT_EQ(s.manifolds, 0);
  EXPECT_NE(svg.find("sink behavior in {x&gt;0,y&lt;0}"), std::string::npos);
  EXPECT_NE(svg.find("source behavior in {x&lt;0,y&gt;0}"), std::string::npos);
  EXPECT_EQ(occurrences(svg, "hyperbolic behavior"), 2u);
}

TEST(Portrait, NoCriticalPointSeedsAroundTheCentre) {
  const auto u = catalog::wavy_ramp();
  portrait::PortraitOptions opt;
  opt.ring_seeds = 8;
  portrait::PortraitSummary s;
  portrait::render_svg(u, u.domain(), opt, &s);
  EXPECT_EQ(s.critical_points, 0);
  EXPECT_EQ(s.trajectories, 8);
}

TEST(Portrait, RefusesEmptyRing) {
  portrait::PortraitOptions opt;
  opt.ring_seeds = 0;
  EXPECT_THROW(portrait::render_svg(catalog::cos_saddle(), catalog::cos_saddle().domain(), opt), InputError);
  opt.ring_seeds = 4;
  opt.ring_radius = 0.0;
  EXPECT_THROW(portrait::render_svg(catalog::cos_saddle(), catalog::cos_saddle().domain(), opt), InputError);
}

TEST(Portrait, Deterministic) {
  const auto u = catalog::cos_saddle();
  EXPECT_EQ(portrait::render_svg(u, u.domain()), portrait::render_svg(u, u.domain()));
}

TEST(Io, NumberRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125}) EXPECT_EQ(std::stod(io::num(v)), v);
  EXPECT_EQ(io::num(std::nan("")), "nan");
}

TEST(Io, FieldCsvLayout) {
  const auto u = catalog::linear<2>(Vec<2>(1.0, 0.0));
  const auto f = conductivity::synthesize(u, GridSpec<2>(Box<2>::cube(-1, 1), {3, 3}), 0.0);
  std::ostringstream os;
  io::write_field_csv(os, f);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y,tau,w,sigma,status");
  std::getline(in, line);
  EXPECT_EQ(line, "-1,-1,1,0,1,ok");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 9);
  const auto j = io::field_summary(f);
  EXPECT_EQ(j["status_counts"]["ok"], 9);
  EXPECT_EQ(j["sigma_min"], 1.0);
}

TEST(Io, TrajectoryReport) {
  const auto u = catalog::cubic();
  flow::Stops<2> st;
  st.max_time = 2.0;
  const auto tr = flow::integrate(u, Vec<2>(0.5, -0.5), flow::Direction::Forward, st);
  std::ostringstream os;
  io::write_trajectory_csv(os, tr);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,x,y,u,W");
  const auto j = io::trajectory_json(tr, u.id());
  EXPECT_EQ(j["termination"], "max-time");
  EXPECT_DOUBLE_EQ(j["t_end"].get<double>(), 2.0);
  // ordered keys keep the dump stable
  EXPECT_EQ(j.dump(), io::trajectory_json(tr, u.id()).dump());
}
