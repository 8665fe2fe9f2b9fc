#include "isoreal/catalog.hpp"
#include "isoreal/probes.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace isoreal;
using namespace isoreal::probes;

namespace {

ProbeReport saddle_probe(const Potential<2>& u) {
  const auto cp = critical::classify(u, Vec<2>::Zero());
  const auto m = critical::trace_manifolds(u, cp, u.domain());
  return probe_saddle_boundedness(u, cp, m, u.domain());
}

// f = x^2/2 + x^3/6 has f' = x (1 + x/2), nonzero on [-1, 1] away from 0.
Component1D skewed() {
  Component1D c;
  c.name = "skewed";
  c.f = [](double t) { return t * t / 2 + t * t * t / 6; };
  c.df = [](double t) { return t + t * t / 2; };
  c.d2f = [](double t) { return 1 + t; };
  return c;
}

ProbeReport synthetic(std::vector<double> values) {
  ProbeReport r;
  double d = 0.5;
  for (double v : values) {
    r.stages.push_back({d, v, 1});
    d *= 0.5;
  }
  return r;
}

}  // namespace

TEST(Decide, SteadyGrowthDiverges) {
  std::vector<double> v;
  for (int k = 1; k <= 20; ++k) v.push_back(0.5 * k * std::log(2.0));
  auto r = synthetic(v);
  decide(r, distance_models(), {});
  EXPECT_EQ(r.verdict, Verdict::Diverging);
  ASSERT_TRUE(r.best);
  EXPECT_EQ(r.best->model, "ln(1/d)");
  EXPECT_NEAR(r.best->slope, 0.5, 1e-12);
}

TEST(Decide, SaturatingValuesAreBounded) {
  std::vector<double> v;
  for (int k = 1; k <= 20; ++k) v.push_back(0.7 * (1 - std::pow(0.5, k)));
  auto r = synthetic(v);
  decide(r, distance_models(), {});
  EXPECT_EQ(r.verdict, Verdict::Bounded);
}

TEST(Decide, GrowthBelowThresholdIsBounded) {
  // increasing but never past 3 x the first value
  auto r = synthetic({1.0, 1.5, 2.0, 2.5, 2.9});
  decide(r, distance_models(), {});
  EXPECT_EQ(r.verdict, Verdict::Bounded);
  EXPECT_DOUBLE_EQ(r.threshold, 3.0);
}

TEST(Decide, LastStagesMustGrowStrictly) {
  auto r = synthetic({0.1, 1.0, 2.0, 3.0, 4.0, 4.0});
  decide(r, distance_models(), {});
  EXPECT_EQ(r.verdict, Verdict::Bounded);
}

TEST(Decide, TooFewStagesAreUnusable) {
  auto r = synthetic({1.0, std::nan(""), 2.0});
  decide(r, distance_models(), {});
  EXPECT_EQ(r.verdict, Verdict::Unusable);
}

TEST(SaddleProbe, CosSaddleIsBounded) {
  const auto r = saddle_probe(catalog::cos_saddle());
  EXPECT_EQ(r.verdict, Verdict::Bounded);
  EXPECT_LE(r.sup(), std::log(4.0));
  EXPECT_EQ(r.kind, ProbeKind::SaddleLinf);
}

TEST(SaddleProbe, HarmonicSaddleHasZeroW) {
  const auto r = saddle_probe(catalog::separable<2>(catalog::separable_preset("quad-saddle")));
  EXPECT_EQ(r.verdict, Verdict::Bounded);
  EXPECT_LE(r.sup(), 1e-9);
}

TEST(SaddleProbe, SmoothPairsWithVanishingLaplacianAreBounded) {
  using namespace catalog::components;
  const auto u1 = catalog::separable<2>({skewed(), quadratic(-1.0)});
  const auto u2 = make_separable<2>(std::vector{one_minus_cos(), quadratic(-1.0)}, Box<2>::cube(-1.5, 1.5));
  for (const auto& u : {u1, u2}) {
    EXPECT_TRUE(critical::check_laplacian_vanishing(u, Vec<2>::Zero()).passes) << u.id();
    EXPECT_EQ(saddle_probe(u).verdict, Verdict::Bounded) << u.id();
  }
}

TEST(SaddleProbe, NonzeroLaplacianDiverges) {
  const auto u = catalog::separable<2>(catalog::separable_preset("unbalanced"));
  EXPECT_FALSE(critical::check_laplacian_vanishing(u, Vec<2>::Zero()).passes);
  const auto r = saddle_probe(u);
  EXPECT_EQ(r.verdict, Verdict::Diverging);
  ASSERT_TRUE(r.best);
  EXPECT_GE(r.best->r_squared, 0.9);
}

TEST(SaddleProbe, CounterexampleDiverges) {
  const auto r = saddle_probe(catalog::counterexample_iii());
  EXPECT_EQ(r.verdict, Verdict::Diverging);
}

TEST(SaddleProbe, RefusesNonSaddle) {
  const auto u = catalog::cubic();
  const auto cp = critical::classify(u, Vec<2>::Zero());
  EXPECT_THROW(probe_saddle_boundedness(u, cp, {}, u.domain()), InputError);
}

TEST(StableProbe, CubicQuadrantGrowsLogarithmically) {
  const auto r = probe_stable_point<2>(catalog::cubic(), Vec<2>::Zero(),
                                       Box<2>{Vec<2>(0.0, -1.0), Vec<2>(1.0, 0.0)});
  EXPECT_EQ(r.verdict, Verdict::Diverging);
  ASSERT_TRUE(r.best);
  EXPECT_EQ(r.best->model, "ln t");
  EXPECT_GE(r.best->r_squared, 0.95);
}

TEST(StableProbe, CubicSampleMatchesClosedForm) {
  // a single sample at (0.5, -0.5): |W(t)| = 2 ln (1 + t/2)^2
  StableProbeOptions<2> opt;
  opt.samples = 1;
  opt.k_max = 10;
  const auto r = probe_stable_point<2>(catalog::cubic(), Vec<2>::Zero(),
                                       Box<2>{Vec<2>(0.0, -1.0), Vec<2>(1.0, 0.0)}, opt);
  for (const auto& s : r.stages)
    EXPECT_NEAR(s.value, 4.0 * std::log(1 + s.parameter / 2), 1e-8 * (1 + s.value));
}

TEST(StableProbe, QuadraticCapGrowsLinearly) {
  const auto r = probe_stable_point<2>(catalog::quadratic_cap<2>(), Vec<2>::Zero(), Box<2>::cube(-0.5, 0.5));
  EXPECT_EQ(r.verdict, Verdict::Diverging);
  ASSERT_TRUE(r.best);
  EXPECT_EQ(r.best->model, "t");
  EXPECT_NEAR(r.best->slope, 2.0, 1e-6);
}

TEST(StableProbe, SourceRunsBackward) {
  const auto u = catalog::quadratic_cap<2>().scaled(-1.0);
  const auto r = probe_stable_point<2>(u, Vec<2>::Zero(), Box<2>::cube(-0.5, 0.5));
  EXPECT_EQ(r.verdict, Verdict::Diverging);
  EXPECT_NE(r.note.find("backward"), std::string::npos);
}

TEST(StableProbe, RefusesNonCriticalAndSaddles) {
  EXPECT_THROW(probe_stable_point<2>(catalog::linear<2>(Vec<2>(1.0, 0.0)), Vec<2>::Zero(), Box<2>::cube(-1, 1)),
               ProbeRefused);
  EXPECT_THROW(probe_stable_point<2>(catalog::cos_saddle(), Vec<2>::Zero(), Box<2>::cube(-1, 1)), ProbeRefused);
}

TEST(StableProbe, RefusesWhenTrajectoriesLeave) {
  // the full cubic box contains quadrants that flow out of K*
  EXPECT_THROW(probe_stable_point<2>(catalog::cubic(), Vec<2>::Zero(), Box<2>::cube(-1.0, 1.0)), ProbeRefused);
}
