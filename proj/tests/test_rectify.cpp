#include "isoreal/catalog.hpp"
#include "isoreal/rectify.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace isoreal;
using namespace isoreal::rectify;

namespace {

GridSpec<2> grid(double lo, double hi, double h) { return GridSpec<2>::with_spacing(Box<2>::cube(lo, hi), h); }

}  // namespace

TEST(Nonvanishing, Examples) {
  const auto a = check_nonvanishing(catalog::wavy_ramp(), grid(-2, 2, 0.05));
  EXPECT_TRUE(a.pass);
  EXPECT_GE(a.min_grad, 1.0);
  EXPECT_FALSE(check_nonvanishing(catalog::cos_saddle(), grid(-3, 3, 0.1)).pass);
  const auto c = check_nonvanishing(catalog::linear<2>(Vec<2>(1.0, 0.0)), grid(-1, 1, 0.1));
  EXPECT_TRUE(c.pass);
  EXPECT_DOUBLE_EQ(c.min_grad, 1.0);
}

TEST(TauField, LinearPotential) {
  const auto u = catalog::linear<2>(Vec<2>(1.0, 0.0));
  const auto g = grid(-1, 1, 0.125);
  const auto f = tau_field(u, g);
  ASSERT_TRUE(f.complete());
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(f.tau[i], -g.node(i)[0], 1e-12);
    EXPECT_EQ(f.sigma[i], 1.0);
  }
  EXPECT_LE(check_cocycle(u, f).max_error, 1e-12);
}

TEST(TauField, WavyRampOriginIsOnTheLevel) {
  const auto u = catalog::wavy_ramp();
  const auto g = grid(-2, 2, 0.25);
  const auto f = tau_field(u, g);
  ASSERT_TRUE(f.complete());
  EXPECT_EQ(f.tau[g.index({8, 8})], 0.0);
  const auto c = check_cocycle(u, f, 20, 9);
  EXPECT_EQ(c.samples, 20);
  EXPECT_LE(c.max_error, 1e-8);
}

TEST(TauField, PaddingIsClippedToTheDomain) {
  const auto u = catalog::linear<2>(Vec<2>(1.0, 0.0));
  const Box<2> p = padded_box(u, Box<2>::cube(-9.0, 9.0), 0.2);
  EXPECT_EQ(p.lo, Vec<2>(-10.0, -10.0));
  EXPECT_EQ(p.hi, Vec<2>(10.0, 10.0));
}

TEST(TauField, UnreachableLevelIsTagged) {
  // {x = 0} lies outside the padded box
  const auto f = tau_field(catalog::linear<2>(Vec<2>(1.0, 0.0)), grid(1, 2, 0.25));
  EXPECT_EQ(f.unreachable, f.grid.size());
  EXPECT_FALSE(f.complete());
}

TEST(TauField, RefusesCriticalPoints) {
  EXPECT_THROW(tau_field(catalog::cos_saddle(), grid(-1, 1, 0.25)), InputError);
}

TEST(StreamFunction, LinearPotentialGivesMinusY) {
  const auto u = catalog::linear<2>(Vec<2>(1.0, 0.0));
  const auto g = grid(-1, 1, 0.125);
  const auto s = stream_v(u, tau_field(u, g));
  EXPECT_EQ(s.base, Vec<2>::Zero());
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(s.v[i], -g.node(i)[1], 1e-13);
  EXPECT_LE(s.circulation_max, 1e-13);
}

TEST(StreamFunction, BaseIsLowerLeftWithoutOrigin) {
  const auto u = catalog::linear<2>(Vec<2>(1.0, 0.0));
  const auto g = GridSpec<2>::with_spacing(Box<2>{Vec<2>(-0.5, 1.0), Vec<2>(0.5, 2.0)}, 0.125);
  const auto s = stream_v(u, tau_field(u, g));
  EXPECT_EQ(s.base, Vec<2>(-0.5, 1.0));
  EXPECT_EQ(s.v[0], 0.0);
}

TEST(StreamFunction, WavyRampIsPathIndependent) {
  const auto u = catalog::wavy_ramp();
  const auto g = grid(-2, 2, 0.02);
  const auto s = stream_v(u, tau_field(u, g));
  EXPECT_EQ(s.loops, 20);
  EXPECT_LE(s.circulation_max, 1e-6);
  EXPECT_NEAR(rectify::detail::bilinear(g, s.v, Vec<2>::Zero()), 0.0, 1e-15);
}

TEST(StreamFunction, CumulativeQuadratureIsExactForCubics) {
  std::vector<double> f;
  const double h = 0.1;
  for (int i = 0; i <= 10; ++i) {
    const double x = i * h;
    f.push_back(x * x * x - 2 * x);
  }
  const auto c = rectify::detail::cumulative(f, h);
  for (int i = 0; i <= 10; ++i) {
    const double x = i * h;
    EXPECT_NEAR(c[i], x * x * x * x / 4 - x * x, 1e-14);
  }
}

TEST(StreamFunction, RefusesPartialFields) {
  const auto u = catalog::linear<2>(Vec<2>(1.0, 0.0));
  auto f = tau_field(u, grid(-1, 1, 0.25));
  f.ok[3] = 0;
  f.unreachable = 1;
  EXPECT_THROW(stream_v(u, f), InputError);
}

TEST(Rectification, LinearPotential) {
  const auto u = catalog::linear<2>(Vec<2>(1.0, 0.0));
  const auto g = grid(-1, 1, 0.125);
  const auto tf = tau_field(u, g);
  const auto m = build_phi_and_verify(tf, stream_v(u, tf), u);
  EXPECT_LE(m.max_dev_e1, 1e-12);
  const Mat<2> J = m.jacobian[g.index({5, 5})];
  EXPECT_NEAR(J(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(J(1, 1), -1.0, 1e-12);
  EXPECT_NEAR(m.min_abs_det, 1.0, 1e-12);
  EXPECT_TRUE(std::isnan(m.jacobian[0](0, 0)));
}

TEST(Rectification, WavyRampSecondOrder) {
  const auto u = catalog::wavy_ramp();
  double prev = 0.0;
  for (double h : {0.04, 0.02}) {
    const auto tf = tau_field(u, grid(-2, 2, h));
    const auto m = build_phi_and_verify(tf, stream_v(u, tf), u);
    EXPECT_LE(m.max_dev_e1, 5e-4);
    EXPECT_GT(m.min_abs_det, 0.1);
    EXPECT_GT(m.min_grad_v, 0.0);
    if (prev > 0) {
      const double order = std::log2(prev / m.max_dev_e1);
      EXPECT_GE(order, 1.7);
      EXPECT_LE(order, 2.3);
    }
    prev = m.max_dev_e1;
    if (h == 0.02) EXPECT_LE(check_flow_rectification(u, m).max_error, 1e-3);
  }
}

TEST(Rectification, GridMismatch) {
  const auto u = catalog::linear<2>(Vec<2>(1.0, 0.0));
  const auto a = tau_field(u, grid(-1, 1, 0.25));
  const auto b = tau_field(u, grid(-1, 1, 0.125));
  EXPECT_THROW(build_phi_and_verify(a, stream_v(u, b), u), InputError);
}
