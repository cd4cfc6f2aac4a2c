#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "thinobs/frequency.hpp"

using namespace thinobs;

namespace {

Homogeneity H(int twice) { return Homogeneity::halves(twice); }

GridFunction<2> sampled(Homogeneity l, int res = 257) {
  return GridFunction<2>::sample(build_grid<2>(res), Profile<2>{l, 1.0, Profile<2>::default_spine()});
}

Solution<2> solved(Homogeneity l, int res = 257) {
  DataParams p;
  p.lambda = l;
  return solve<2>(build_grid<2>(res), make_boundary_data<2>(DataKind::profile, p));
}

}  // namespace

TEST(DyadicRadii, IncreasingWithFloor) {
  const auto r = dyadic_radii(0.5, 0.1);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_DOUBLE_EQ(r[0], 0.125);
  EXPECT_DOUBLE_EQ(r[2], 0.5);
  EXPECT_EQ(dyadic_radii(0.5, 0.125).size(), 3u);
}

TEST(CheckMonotone, HandSequences) {
  EXPECT_TRUE(check_monotone({1.0, 2.0, 3.0}, 0.0).pass);
  const auto rep = check_monotone({1.0, 2.0, 1.5, 4.0}, 0.1);
  EXPECT_DOUBLE_EQ(rep.worst_dip, 0.25);
  EXPECT_EQ(rep.location, 1u);
  EXPECT_FALSE(rep.pass);
  EXPECT_TRUE(check_monotone({1.0, 2.0, 1.5, 4.0}, 0.25).pass);
  EXPECT_THROW(check_monotone({1.0, 2.0}, 0.1), Error);
}

TEST(BoundaryMass, HomogeneousScaling) {
  // H_0(2r) / H_0(r) = 4^lambda for a lambda-homogeneous field
  for (int t : {3, 4, 7}) {
    const auto f = sampled(H(t));
    const double ratio = boundary_mass<2>(f, Point<2>{}, 0.5) / boundary_mass<2>(f, Point<2>{}, 0.25);
    EXPECT_NEAR(std::log2(ratio) / 2.0, H(t).value(), 2e-2) << t;
  }
  // unit normalization: H_0(1) = 1 for psi_lambda
  EXPECT_NEAR(boundary_mass<2>(sampled(H(3)), Point<2>{}, 1.0), 1.0, 1e-3);
}

TEST(FrequencyCurve, AnalyticProfilesHaveConstantPhi) {
  for (int t : {2, 3, 4, 7}) {
    const auto f = sampled(H(t));
    const double h = f.grid().spacing();
    const auto curve = frequency_curve<2>(f, Point<2>{}, dyadic_radii(0.5, 8.0 * h));
    for (const auto& row : curve.rows) {
      ASSERT_TRUE(row.phi);
      EXPECT_NEAR(*row.phi / H(t).value(), 1.0, 2e-2) << t << " r=" << row.r;
    }
  }
}

TEST(FrequencyCurve, ColumnsAndRejections) {
  const auto f = sampled(H(3), 129);
  const auto curve = frequency_curve<2>(f, Point<2>{}, {0.125, 0.25, 0.5}, {1.0, 1.5}, {2.0});
  const auto t = curve.csv();
  EXPECT_EQ(t.columns().size(), 4u + 2u + 2u);
  EXPECT_EQ(t.size(), 3u);
  // H_mu with mu = lambda is scale invariant
  EXPECT_NEAR(curve.H_mu(1)[0] / curve.H_mu(1)[2], 1.0, 1e-2);
  EXPECT_THROW(frequency_curve<2>(f, Point<2>{}, {0.25, 0.125}), Error);
  EXPECT_THROW(frequency_curve<2>(f, Point<2>{}, {0.01}), Error);
  EXPECT_THROW(frequency_curve<2>(f, Point<2>{}, {0.5, 1.5}, {}, {2.0}), Error);
}

TEST(MonneauMax, PicksTheLargerEndForGrowingMass) {
  // H_mu(s r) = s^{2(lambda - mu)} const for a homogeneous field: maximized at s = 2 when mu < lambda
  const auto f = sampled(H(3), 129);
  const auto v = monneau_max<2>(f, Point<2>{}, 1.0, 0.25);
  EXPECT_NEAR(v.s, 2.0, 1e-12);
  const auto w = monneau_max<2>(f, Point<2>{}, 2.0, 0.25);
  EXPECT_NEAR(w.s, 1.0, 1e-12);
}

TEST(EstimateFrequency, RecoversProfileHomogeneity) {
  for (int t : {2, 3, 4, 7}) {
    const auto s = solved(H(t));
    const auto est = estimate_frequency<2>(s, Point<2>{});
    EXPECT_NEAR(est.value, H(t).value(), 0.1) << t;
    EXPECT_LE(est.lower, est.value);
    EXPECT_GE(est.upper, est.value);
  }
}

TEST(EstimateFrequency, RejectsNonContactPoints) {
  const auto s = solved(H(3), 129);
  EXPECT_TRUE(is_contact_point(s, Point<2>{-0.5, 0.0}));
  EXPECT_FALSE(is_contact_point(s, Point<2>{0.5, 0.0}));
  EXPECT_THROW(estimate_frequency<2>(s, Point<2>{0.5, 0.0}), Error);
}

TEST(EstimateFrequency, CoarseGridsStayInsideTheBox) {
  // 65 nodes: 8h = 1/2 leaves two dyadic radii, so the triple is 4h, 8h, 16h
  const auto est = estimate_frequency<2>(solved(H(3), 65), Point<2>{});
  EXPECT_DOUBLE_EQ(est.radii.front(), 0.25);
  EXPECT_DOUBLE_EQ(est.radii.back(), 1.0);
  EXPECT_NEAR(est.value, 1.5, 0.2);
  EXPECT_THROW(estimate_frequency<2>(solved(H(3), 33), Point<2>{}), Error);
}

TEST(Almgren, MonotoneAtContactPointsOfSolves) {
  for (int t : {3, 4}) {
    const auto s = solved(H(t));
    const double h = s.grid().spacing();
    for (double x : {0.0, -0.25}) {
      const auto curve = frequency_curve<2>(s.u, Point<2>{x, 0.0}, dyadic_radii(0.5, 8.0 * h));
      EXPECT_TRUE(check_monotone(curve.phi(), 1e-2).pass) << t << " x=" << x;
    }
  }
}

TEST(HRatio, LowerBoundForProfiles) {
  // (R/r)^lambda <= sqrt(H_0(R)/H_0(r)) up to 5%
  const auto s = solved(H(3));
  const double h = s.grid().spacing();
  const auto curve = frequency_curve<2>(s.u, Point<2>{}, dyadic_radii(0.5, 8.0 * h));
  const auto H0 = curve.H0();
  const auto r = curve.radii();
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = i + 1; j < r.size(); ++j)
      EXPECT_GE(H0[j] / H0[i], std::pow(r[j] / r[i], 2.0 * 1.5) * 0.95);
}
