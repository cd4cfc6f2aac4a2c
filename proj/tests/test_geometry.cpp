#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "thinobs/geometry.hpp"

using namespace thinobs;

TEST(Grid, ExtentsAndSpacing) {
  const auto g = build_grid<2>(17, 2.0);
  EXPECT_EQ(g.extents()[0], 17);
  EXPECT_EQ(g.extents()[1], 9);
  EXPECT_EQ(g.size(), 17u * 9u);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.25);
  const auto g3 = build_grid<3>(17, 1.0);
  EXPECT_EQ(g3.size(), 17u * 17u * 9u);
  EXPECT_EQ(g3.stride(2), 1u);
  EXPECT_EQ(g3.stride(1), 9u);
}

TEST(Grid, RejectsBadRequests) {
  EXPECT_THROW(build_grid<2>(16), Error);
  EXPECT_THROW(build_grid<2>(15), Error);
  EXPECT_THROW(build_grid<2>(17, 0.0), Error);
  EXPECT_THROW(validate_grid_request(4, 17, 1.0), Error);
}

TEST(Grid, PositionsAndKinds) {
  const auto g = build_grid<2>(17, 2.0);
  const Index<2> corner{0, 0};
  EXPECT_DOUBLE_EQ(g.position(corner)[0], -2.0);
  EXPECT_DOUBLE_EQ(g.position(corner)[1], 0.0);
  const Index<2> mid{8, 0};
  EXPECT_EQ(g.kind(mid), NodeKind::thin);
  const Index<2> above{8, 3};
  EXPECT_EQ(g.kind(above), NodeKind::interior);
  EXPECT_DOUBLE_EQ(g.position(above)[1], 0.75);
  const Index<2> top{8, 8};
  EXPECT_EQ(g.kind(top), NodeKind::outer);
  const Index<2> side{0, 4};
  EXPECT_EQ(g.kind(side), NodeKind::outer);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g.index(g.multi_index(i)), i);
}

TEST(GridFunction, MultilinearIsExactOnBilinearFields) {
  const auto g = build_grid<2>(33, 1.0);
  auto f = [](const Point<2>& x) { return 1.0 + 2.0 * x[0] + 0.5 * x[0] * std::abs(x[1]) - std::abs(x[1]); };
  const auto gf = GridFunction<2>::sample(g, f);
  for (double x : {-0.91, -0.3, 0.0, 0.123, 0.77})
    for (double y : {0.0, 0.05, 0.31, 0.99}) {
      const Point<2> p{x, y};
      EXPECT_NEAR(gf(p), f(p), 1e-13);
    }
}

TEST(GridFunction, EvenReflection) {
  const auto g = build_grid<3>(17, 1.0);
  const auto gf = GridFunction<3>::sample(g, [](const Point<3>& x) { return x[0] + 2.0 * x[1] + 3.0 * x[2]; });
  const Point<3> up{0.1, -0.2, 0.3}, down{0.1, -0.2, -0.3};
  EXPECT_DOUBLE_EQ(gf(up), gf(down));
  EXPECT_NEAR(gf.gradient(up)[2], 3.0, 1e-12);
  EXPECT_NEAR(gf.gradient(down)[2], -3.0, 1e-12);
  EXPECT_THROW(gf(Point<3>{1.5, 0.0, 0.0}), Error);
}

TEST(SphereRule, WeightsAndSecondMoments) {
  for (int m : {64, 256}) {
    double w2 = 0.0, x2 = 0.0;
    for (const auto& [d, w] : sphere_rule<2>(m)) w2 += w, x2 += w * d[0] * d[0];
    EXPECT_NEAR(w2, 2.0 * std::numbers::pi, 1e-12);
    EXPECT_NEAR(x2, std::numbers::pi, 1e-12);
    double w3 = 0.0, z2 = 0.0, x4 = 0.0;
    for (const auto& [d, w] : sphere_rule<3>(m)) w3 += w, z2 += w * d[2] * d[2], x4 += w * std::pow(d[0], 4);
    EXPECT_NEAR(w3, 4.0 * std::numbers::pi, 1e-10);
    EXPECT_NEAR(z2, 4.0 * std::numbers::pi / 3.0, 1e-10);
    EXPECT_NEAR(x4, 4.0 * std::numbers::pi / 5.0, 1e-10);
  }
}

TEST(SampleSphere, EnforcesFloorsAndDomain) {
  const auto g = build_grid<2>(33, 1.0);
  const GridFunction<2> one(g, 1.0);
  const double h = g.spacing();
  EXPECT_THROW(sample_sphere<2>(one, Point<2>{}, 3.0 * h, 64), Error);
  EXPECT_THROW(sample_sphere<2>(one, Point<2>{0.9, 0.0}, 0.5, 64), Error);
  EXPECT_THROW(sample_sphere<2>(one, Point<2>{}, 0.5, 32), Error);
  EXPECT_NEAR(sample_sphere<2>(one, Point<2>{}, 0.5, 64).integral_sq(), 2.0 * std::numbers::pi, 1e-12);
}

TEST(BallIntegrals, LinearEnergyAndConstantShell) {
  const auto g = build_grid<2>(129, 1.0);
  const auto lin = GridFunction<2>::sample(g, [](const Point<2>& x) { return 3.0 * x[0]; });
  // r^{2-n} int_{B_r} |grad|^2 = 9 pi r^2
  for (double r : {0.125, 0.25, 0.5})
    EXPECT_NEAR(ball_energy<2>(lin, Point<2>{}, r) / (9.0 * std::numbers::pi * r * r), 1.0, 1e-2);
  const GridFunction<2> one(g, 1.0);
  EXPECT_NEAR(shell_l2_sq<2>(one, Point<2>{}, 0.25) / (3.0 * std::numbers::pi), 1.0, 1e-2);
  const auto g3 = build_grid<3>(65, 1.0);
  const GridFunction<3> one3(g3, 1.0);
  EXPECT_NEAR(ball_l2_sq<3>(one3, Point<3>{}, 0.5) / (4.0 * std::numbers::pi / 3.0 * 0.125), 1.0, 2e-2);
}

TEST(BallIntegrals, MonotoneInRadius) {
  const auto g = build_grid<2>(65, 1.0);
  const auto f = GridFunction<2>::sample(g, [](const Point<2>& x) { return std::sin(3.0 * x[0]) + x[1]; });
  double prev = 0.0;
  for (double r = 0.125; r <= 0.9; r += 0.01) {
    const double v = ball_l2_sq<2>(f, Point<2>{}, r);
    EXPECT_GE(v, prev);
    prev = v;
  }
}
