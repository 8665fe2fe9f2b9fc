#include "isoreal/config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace isoreal;
using namespace isoreal::config;

TEST(RunConfig, RoundTripsThroughJson) {
  RunConfig c;
  c.potential = "separable:quad-saddle";
  c.lo = {-0.5, -std::numbers::pi};
  c.hi = {0.5, 1.0 / 3.0};
  c.spacing = std::numbers::pi / 100;
  c.level = 0.1;
  c.rtol = 1e-11;
  c.check_div = true;
  c.seed = 0xfeedfacecafebeefULL;
  c.workers = 3;
  const Json j = to_json(c);
  const RunConfig back = from_json(Json::parse(j.dump()));
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_EQ(*back.spacing, std::numbers::pi / 100);
  EXPECT_EQ(back.hi[1], 1.0 / 3.0);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_FALSE(back.atol);
}

TEST(RunConfig, MissingKeysKeepDefaults) {
  const auto c = from_json(Json::parse(R"({"potential": "cubic-degenerate"})"));
  EXPECT_EQ(c.potential, "cubic-degenerate");
  EXPECT_EQ(c.resolution, RunConfig{}.resolution);
  EXPECT_FALSE(c.level);
}

TEST(RunConfig, RejectsUnknownKeysAndWrongTypes) {
  EXPECT_THROW(from_json(Json::parse(R"({"potentail": "cos-saddle"})")), InputError);
  EXPECT_THROW(from_json(Json::parse(R"({"resolution": "many"})")), InputError);
  EXPECT_THROW(from_json(Json::parse("[1, 2]")), InputError);
}

TEST(RunConfig, Validation) {
  RunConfig c;
  EXPECT_NO_THROW(validate(c));
  c.resolution = 7;
  EXPECT_THROW(validate(c), InputError);
  c = {};
  c.grad_floor = 0.0;
  EXPECT_THROW(validate(c), InputError);
  c = {};
  c.lo = {0.0, 0.0};
  EXPECT_THROW(validate(c), InputError);
  c = {};
  c.direction = "sideways";
  EXPECT_THROW(validate(c), InputError);
}

TEST(ParseLength, PiExpressions) {
  const double pi = std::numbers::pi;
  EXPECT_EQ(parse_length("0.25"), 0.25);
  EXPECT_EQ(parse_length("-2"), -2.0);
  EXPECT_EQ(parse_length("pi"), pi);
  EXPECT_EQ(parse_length("-pi"), -pi);
  EXPECT_EQ(parse_length("pi/100"), pi / 100);
  EXPECT_EQ(parse_length("2*pi"), 2 * pi);
  EXPECT_EQ(parse_length("3pi/4"), 3 * pi / 4);
  EXPECT_THROW(parse_length("pie"), InputError);
  EXPECT_THROW(parse_length("1.5x"), InputError);
  EXPECT_THROW(parse_length(""), InputError);
}

TEST(ResolvePotential, CatalogAndSpecs) {
  EXPECT_EQ(std::get<Potential<2>>(resolve_potential("cos-saddle")).id(), "cos-saddle");
  EXPECT_TRUE(std::holds_alternative<Potential<3>>(resolve_potential("saddle-3d")));
  const auto s = std::get<Potential<2>>(resolve_potential("separable:x1-cos"));
  EXPECT_EQ(s.id(), "separable:x1-cos");
  EXPECT_EQ(s.domain().hi, Vec<2>(1.0, 1.0));
  EXPECT_TRUE(std::holds_alternative<Potential<3>>(resolve_potential("separable:lin,sq1,sq-2")));
  for (const auto& id : catalog::ids()) EXPECT_NO_THROW(resolve_potential(id)) << id;
}

TEST(ResolvePotential, BadSpecsAreInputErrors) {
  EXPECT_THROW(resolve_potential("grid:/nonexistent/missing.csv"), InputError);
  EXPECT_THROW(resolve_potential("no-such-potential"), InputError);
  EXPECT_THROW(resolve_potential("separable:lin"), InputError);
  EXPECT_THROW(resolve_potential("separable:lin,bogus"), InputError);
}

TEST(ResolvePotential, BoxAndGrid) {
  const auto u = std::get<Potential<2>>(resolve_potential("cubic-degenerate"));
  RunConfig c;
  EXPECT_EQ(box_of(c, u).lo, u.domain().lo);
  c.lo = {0.0, -1.0};
  c.hi = {1.0, 0.0};
  const auto b = box_of(c, u);
  EXPECT_EQ(b.hi, Vec<2>(1.0, 0.0));
  EXPECT_EQ(grid_of(c, b).n[0], c.resolution);
  c.spacing = 0.125;
  EXPECT_EQ(grid_of(c, b).n[1], 9);
  c.lo = {0.0, 0.0, 0.0};
  c.hi = {1.0, 1.0, 1.0};
  EXPECT_THROW(box_of(c, u), InputError);
}
