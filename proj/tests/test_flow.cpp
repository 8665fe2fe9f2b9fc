#include "isoreal/catalog.hpp"
#include "isoreal/flow.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace isoreal;
using namespace isoreal::flow;
using std::numbers::pi;

namespace {

// Closed-form flow of u = (y^3 - x^3)/3.
Vec<2> cubic_flow(const Vec<2>& p, double t) {
  return Vec<2>(p[0] / (1 + t * p[0]), p[1] / (1 - t * p[1]));
}

double cubic_w(const Vec<2>& p, double t) {
  return -2.0 * std::log((1 + t * p[0]) * (1 - t * p[1]));
}

double cos_tau(double x, double y) { return 0.5 * std::log(std::abs(std::tan(y / 2) / std::tan(x / 2))); }

}  // namespace

TEST(Integrate, CubicClosedFormFlow) {
  const auto u = catalog::cubic();
  const Vec<2> x0(0.5, -0.5);
  Stops<2> stops;
  stops.max_time = 1.0;
  const auto traj = integrate(u, x0, Direction::Forward, stops);
  ASSERT_TRUE(std::holds_alternative<MaxTime>(traj.termination));
  EXPECT_NEAR(traj.back().t, 1.0, 0.0);
  EXPECT_LT((traj.back().x - Vec<2>(1.0 / 3, -1.0 / 3)).norm(), 1e-10);
  EXPECT_NEAR(traj.back().w, -2.0 * std::log(2.25), 1e-10);
  EXPECT_EQ(traj.samples.front().w, 0.0);
}

TEST(Integrate, ZeroTimeIsIdentity) {
  const auto u = catalog::cos_saddle();
  const Vec<2> x0(0.4, 1.2);
  EXPECT_EQ(flow_map(u, x0, 0.0), x0);
  EXPECT_EQ(laplacian_integral(u, x0, 0.0), 0.0);
  Stops<2> stops;
  stops.max_time = 0.0;
  const auto traj = integrate(u, x0, Direction::Forward, stops);
  EXPECT_EQ(traj.back().x, x0);
  EXPECT_EQ(traj.back().w, 0.0);
}

TEST(Integrate, BackwardReportsNegativeTime) {
  const auto u = catalog::cubic();
  const Vec<2> x0(0.5, -0.5);
  Stops<2> stops;
  stops.max_time = 0.5;
  const auto traj = integrate(u, x0, Direction::Backward, stops);
  EXPECT_DOUBLE_EQ(traj.back().t, -0.5);
  EXPECT_LT((traj.back().x - cubic_flow(x0, -0.5)).norm(), 1e-10);
  for (std::size_t i = 1; i < traj.samples.size(); ++i)
    EXPECT_LT(traj.samples[i].t, traj.samples[i - 1].t);
}

TEST(Integrate, StopsAtDomainFace) {
  const auto u = catalog::linear<2>(Vec<2>(1.0, 0.0));
  Stops<2> stops;
  stops.box = Box<2>::cube(-1.0, 1.0);
  const auto traj = integrate(u, Vec<2>(0.0, 0.2), Direction::Forward, stops);
  ASSERT_TRUE(std::holds_alternative<DomainExit>(traj.termination));
  const auto exit = std::get<DomainExit>(traj.termination);
  EXPECT_EQ(exit.axis, 0);
  EXPECT_EQ(exit.side, 1);
  EXPECT_NEAR(traj.back().t, 1.0, 1e-9);
}

TEST(Integrate, CriticalConvergenceNearSink) {
  const auto u = catalog::quadratic_cap<2>();
  const auto traj = integrate(u, Vec<2>(0.3, -0.2), Direction::Forward);
  ASSERT_TRUE(std::holds_alternative<CriticalConvergence<2>>(traj.termination));
  EXPECT_LT(std::get<CriticalConvergence<2>>(traj.termination).limit.norm(), 1e-8);
}

TEST(Integrate, RejectsBadInput) {
  const auto u = catalog::cubic();
  EXPECT_THROW(integrate(u, Vec<2>(2.0, 0.0), Direction::Forward), DomainError);
  Stops<2> stops;
  stops.grad_floor = 0.0;
  EXPECT_THROW(integrate(u, Vec<2>(0.1, 0.0), Direction::Forward, stops), InputError);
}

TEST(Integrate, NonFiniteDerivativeIsAnError) {
  const auto u = make_closed_form<2>(
      "log", [](const Vec<2>& p) { return std::log(p[0]); },
      [](const Vec<2>& p) { return Vec<2>(1.0 / p[0], 0.0); },
      [](const Vec<2>& p) {
        Mat<2> h = Mat<2>::Zero();
        h(0, 0) = -1.0 / (p[0] * p[0]);
        return h;
      },
      Box<2>::cube(-1.0, 1.0));
  EXPECT_THROW(integrate(u, Vec<2>(0.0, 0.0), Direction::Forward), EvaluationError);
}

TEST(HittingTime, CosSaddleClosedForm) {
  const auto u = catalog::cos_saddle();
  const auto r = hitting_time(u, Vec<2>(pi / 3, pi / 2), 0.0);
  ASSERT_TRUE(r.hit());
  EXPECT_NEAR(r.tau, std::log(3.0) / 4, 1e-10);
  EXPECT_NEAR(r.tau, 0.2746531, 1e-7);
  EXPECT_LE(std::abs(r.level_residual), 1e-10);
}

TEST(HittingTime, AlreadyOnLevel) {
  const auto u = catalog::cos_saddle();
  const auto r = hitting_time(u, Vec<2>(0.8, 0.8), 0.0);
  ASSERT_TRUE(r.hit());
  EXPECT_EQ(r.tau, 0.0);
  EXPECT_EQ(r.w, 0.0);
}

TEST(HittingTime, CubicQuadrant) {
  const auto u = catalog::cubic();
  const auto r = hitting_time(u, Vec<2>(0.5, 0.25), 0.0);
  ASSERT_TRUE(r.hit());
  EXPECT_NEAR(r.tau, 1.0, 1e-10);
  // hit point 2xy/(x+y) (1, 1)
  EXPECT_NEAR(r.point[0], 1.0 / 3, 1e-10);
  EXPECT_NEAR(r.point[1], 1.0 / 3, 1e-10);
}

TEST(HittingTime, NoHitOnStableManifold) {
  const auto u = catalog::cos_saddle();
  // x = 0 is the stable manifold: forward flow converges to the saddle
  const auto r = hitting_time(u, Vec<2>(0.0, 1.0), 0.0);
  EXPECT_FALSE(r.hit());
  EXPECT_EQ(r.status, HitStatus::CriticalConvergence);
}

TEST(HittingTime, RefinementTolerance) {
  const auto u = catalog::cos_saddle();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-pi + 0.1, pi - 0.1);
  for (int k = 0; k < 40; ++k) {
    const Vec<2> x(d(rng), d(rng));
    for (double c : {0.0, 0.3, -0.5}) {
      const auto r = hitting_time(u, x, c);
      if (!r.hit()) continue;
      EXPECT_LE(std::abs(u.value(r.point) - c), 1e-10 * (1 + std::abs(c)));
    }
  }
}

TEST(LaplacianIntegral, CubicClosedForm) {
  const auto u = catalog::cubic();
  const Vec<2> x0(0.5, -0.5);
  EXPECT_NEAR(laplacian_integral(u, x0, 2.0), -4.0 * std::log(2.0), 1e-9);
  for (double t : {0.5, 1.0, 2.0}) EXPECT_NEAR(laplacian_integral(u, x0, t), cubic_w(x0, t), 1e-9);
}

TEST(LaplacianIntegral, HarmonicIntegrandVanishes) {
  const auto u = catalog::linear<2>(Vec<2>(1.0, 1.0));
  for (double t : {0.5, 3.0, -2.0}) EXPECT_EQ(laplacian_integral(u, Vec<2>(0.1, 0.2), t), 0.0);
}

TEST(LaplacianIntegral, AgreesWithHittingExponent) {
  const auto u = catalog::cos_saddle();
  const Vec<2> x0(pi / 3, pi / 2);
  const auto r = hitting_time(u, x0, 0.0);
  ASSERT_TRUE(r.hit());
  EXPECT_NEAR(laplacian_integral(u, x0, r.tau), r.w, 1e-8);
}

TEST(LaplacianIntegral, SemigroupAdditivity) {
  const auto u = catalog::cos_saddle();
  const Vec<2> x0(0.7, 0.9);
  const double t1 = 0.4, t2 = 0.35;
  const double whole = laplacian_integral(u, x0, t1 + t2);
  const double part = laplacian_integral(u, x0, t1) + laplacian_integral(u, flow_map(u, x0, t1), t2);
  EXPECT_NEAR(whole, part, 1e-10);
}

TEST(LaplacianIntegral, IncompleteTrajectoryThrows) {
  const auto u = catalog::linear<2>(Vec<2>(1.0, 0.0));
  Stops<2> stops;
  stops.box = Box<2>::cube(-1.0, 1.0);
  EXPECT_THROW(laplacian_integral(u, Vec<2>(0.0, 0.0), 5.0, stops), IncompleteIntegral);
}

TEST(FlowProperties, ConvergenceOrderOnCubic) {
  const auto u = catalog::cubic();
  const Vec<2> x0(0.5, -0.5);
  Stops<2> stops;
  stops.max_time = 2.0;
  auto run = [&](double tol) {
    Tolerances t;
    t.rtol = tol;
    t.atol = tol;
    const auto traj = integrate(u, x0, Direction::Forward, stops, t);
    return std::pair{(traj.back().x - cubic_flow(x0, 2.0)).norm(), traj.accepted_steps};
  };
  const auto [e1, n1] = run(1e-6);
  const auto [e2, n2] = run(1e-9);
  ASSERT_GT(n2, n1);
  const double order = std::log(e1 / e2) / std::log(static_cast<double>(n2) / n1);
  EXPECT_GE(order, 4.0);
}

TEST(FlowProperties, UMonotoneAlongForwardTrajectories) {
  const auto u = catalog::cos_saddle();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-2.5, 2.5);
  for (int k = 0; k < 20; ++k) {
    const auto traj = integrate(u, Vec<2>(d(rng), d(rng)), Direction::Forward);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
      const double g = u.gradient(traj.samples[i - 1].x).norm();
      if (g > 1e-6) EXPECT_GT(traj.samples[i].u, traj.samples[i - 1].u);
    }
  }
}

TEST(FlowProperties, SemigroupOfFlowMap) {
  const auto u = catalog::cos_saddle();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.3, 2.5);
  std::uniform_real_distribution<double> dt(0.05, 0.5);
  for (int k = 0; k < 20; ++k) {
    const Vec<2> x(d(rng), -d(rng));
    const double t1 = dt(rng), t2 = dt(rng);
    Stops<2> stops;
    stops.box = Box<2>::cube(-10, 10);
    const Vec<2> direct = flow_map(u, x, t1 + t2, stops);
    const Vec<2> composed = flow_map(u, flow_map(u, x, t1, stops), t2, stops);
    EXPECT_LT((direct - composed).norm(), 1e-10);
  }
}
