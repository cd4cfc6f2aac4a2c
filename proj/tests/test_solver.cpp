#include <gtest/gtest.h>

#include <cmath>

#include "thinobs/solver.hpp"

using namespace thinobs;

namespace {

double max_error(const Solution<2>& s, const std::function<double(const Point<2>&)>& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < s.grid().size(); ++i) e = std::max(e, std::abs(s.u[i] - exact(s.grid().position(i))));
  return e;
}

}  // namespace

TEST(DiscreteLaplacian, ExactOnEvenQuadratics) {
  const auto g = build_grid<2>(33, 1.0);
  // x^2 + 3 y^2: Lap = 8 everywhere, the ghost reflection is exact at y = 0
  const auto f = GridFunction<2>::sample(g, [](const Point<2>& x) { return x[0] * x[0] + 3.0 * x[1] * x[1]; });
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.kind(i) != NodeKind::outer) EXPECT_NEAR(discrete_laplacian<2>(f, i), 8.0, 1e-9);
  const auto g3 = build_grid<3>(17, 1.0);
  const auto f3 = GridFunction<3>::sample(g3, [](const Point<3>& x) { return x[0] * x[1] - x[2] * x[2]; });
  for (std::size_t i = 0; i < g3.size(); ++i)
    if (g3.kind(i) != NodeKind::outer) EXPECT_NEAR(discrete_laplacian<3>(f3, i), -2.0, 1e-9);
}

TEST(Solve, InactiveObstacleReproducesHarmonicQuadratic) {
  // trace 1 + x^2 > 0, so the constraint never binds and the 5-point scheme is exact
  const auto g = build_grid<2>(65, 1.0);
  auto exact = [](const Point<2>& x) { return 1.0 + x[0] * x[0] - x[1] * x[1]; };
  const auto s = solve<2>(g, custom_boundary_data<2>(exact));
  ASSERT_TRUE(s.converged);
  EXPECT_LT(max_error(s, exact), 1e-9);
}

TEST(Solve, HarmonicMinTouchesOnlyAtOrigin) {
  const auto g = build_grid<2>(65, 1.0);
  DataParams p;
  p.tau = 1.0;
  const auto s = solve<2>(g, make_boundary_data<2>(DataKind::harmonic_min, p));
  ASSERT_TRUE(s.converged);
  EXPECT_LT(max_error(s, [](const Point<2>& x) { return x[0] * x[0] - x[1] * x[1]; }), 1e-9);
}

TEST(Solve, ThreeHalvesProfileKKT) {
  const auto g = build_grid<2>(129);
  DataParams p;
  const auto s = solve<2>(g, make_boundary_data<2>(DataKind::profile, p));
  ASSERT_TRUE(s.converged);
  const auto kkt = kkt_report(s);
  EXPECT_LE(kkt.max(), 10.0 * s.tol);
  EXPECT_LE(s.max_energy_increase, 1e-12);
  // contact on x < 0, positive trace on x > 0
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.kind(i) != NodeKind::thin) continue;
    const double x = g.position(i)[0];
    if (x < -0.1) EXPECT_LT(s.u[i], 1e-9);
    if (x > 0.1) EXPECT_GT(s.u[i], 1e-4);
  }
  // O(h^2) agreement with the exact solution
  EXPECT_LT(max_error(s, Profile<2>{p.lambda, 1.0, Profile<2>::default_spine()}), 5e-3);
}

TEST(Solve, ThreeDimensionalProfile) {
  const auto g = build_grid<3>(33);
  DataParams p;
  const auto s = solve<3>(g, make_boundary_data<3>(DataKind::profile, p));
  ASSERT_TRUE(s.converged);
  EXPECT_LE(kkt_report(s).max(), 10.0 * s.tol);
}

TEST(Solve, NonConvergenceIsFlagged) {
  const auto g = build_grid<2>(33);
  SolverOptions o;
  o.max_iter = 1;
  const auto s = solve<2>(g, make_boundary_data<2>(DataKind::profile, DataParams{}), o);
  EXPECT_FALSE(s.converged);
  EXPECT_EQ(s.iterations, 1);
}

TEST(Solve, RejectsBadOptionsAndData) {
  const auto g = build_grid<2>(33);
  SolverOptions o;
  o.omega = 2.0;
  EXPECT_THROW(solve<2>(g, make_boundary_data<2>(DataKind::profile, DataParams{}), o), Error);
  DataParams p;
  p.lambda = Homogeneity::halves(5);
  EXPECT_THROW(make_boundary_data<2>(DataKind::profile, p), Error);
  p = DataParams{};
  p.epsilon = -10.0;
  EXPECT_THROW(make_boundary_data<2>(DataKind::perturbed_profile, p), Error);
  p = DataParams{};
  p.tau = -1.0;
  EXPECT_THROW(make_boundary_data<2>(DataKind::profile, p), Error);
}

TEST(Solve, SlitProblemWithHalfProfile) {
  // psi_{1/2} vanishes on {x <= 0, y = 0} and is harmonic elsewhere
  const auto g = build_grid<2>(129);
  Profile<2> q{Homogeneity::halves(1), 1.0, Profile<2>::default_spine()};
  const auto s = solve_slit<2>(g, custom_boundary_data<2>(q));
  ASSERT_TRUE(s.converged);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.kind(i) == NodeKind::thin && g.position(i)[0] <= 0.0) EXPECT_EQ(s.u[i], 0.0);
  EXPECT_LT(max_error(s, q), 2e-2);
}

TEST(ThinIntegral, DifferenceOfSolvesHasSignedThinProduct) {
  const auto g = build_grid<2>(65);
  DataParams a, b;
  b.lambda = Homogeneity::halves(7);
  const auto sa = solve<2>(g, make_boundary_data<2>(DataKind::profile, a));
  const auto sb = solve<2>(g, make_boundary_data<2>(DataKind::profile, b));
  const auto w = sa.u - sb.u;
  // u Lap u = 0 and Lap u <= 0 on thin nodes for both, so w Lap_h w >= 0 node by node
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.kind(i) == NodeKind::thin) EXPECT_GE(w[i] * discrete_laplacian<2>(w, i), -10.0 * sa.tol);
  EXPECT_GE(thin_wlapw_integral<2>(w), -10.0 * sa.tol);
  EXPECT_GT(thin_wlapw_integral<2>(w), 0.0);
}
