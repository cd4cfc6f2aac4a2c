#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "thinobs/blowup.hpp"

using namespace thinobs;

namespace {

Homogeneity H(int twice) { return Homogeneity::halves(twice); }

// smallest n >= m such that every window a_n..a_k averages at least p
std::optional<std::size_t> brute(const std::vector<int>& a, double p, std::size_t m) {
  for (std::size_t n = m; n < a.size(); ++n) {
    bool ok = true;
    double sum = 0.0;
    for (std::size_t k = n; k < a.size() && ok; ++k) {
      sum += a[k];
      ok = sum >= p * static_cast<double>(k - n + 1) - 1e-12;
    }
    if (ok) return n;
  }
  return std::nullopt;
}

}  // namespace

TEST(FitProfile, ExactProfileIn2D) {
  const Profile<2> q{H(7), 0.3, Point<2>{-1.0, 0.0}};
  const auto fit = fit_profile<2>(q, Point<2>{}, 0.5, H(7));
  EXPECT_NEAR(fit.tau, 0.3, 1e-12);
  EXPECT_NEAR(fit.spine_angle, std::numbers::pi, 1e-12);
  EXPECT_LT(fit.normalized, 1e-12);
}

TEST(FitProfile, RecoversRotatedSpineIn3D) {
  const double angle = 1.1;
  const Profile<3> q{H(3), 2.0, spine_from_angle<3>(angle)};
  const auto fit = fit_profile<3>(q, Point<3>{}, 0.5, H(3));
  EXPECT_NEAR(fit.tau, 2.0, 1e-4);
  EXPECT_NEAR(std::remainder(fit.spine_angle - angle, 2.0 * std::numbers::pi), 0.0, 1e-4);
  EXPECT_LT(fit.normalized, 1e-4);
}

TEST(FitProfile, WrongHomogeneityLeavesResidual) {
  const Profile<2> q{H(3), 1.0, Point<2>{1.0, 0.0}};
  EXPECT_GT(fit_profile<2>(q, Point<2>{}, 0.5, H(7)).normalized, 0.1);
  EXPECT_THROW(fit_profile<2>(q, Point<2>{}, 0.5, H(5)), Error);
}

TEST(DecayScan, PerturbedAnalyticFieldDecaysAtLambdaPlusTwo) {
  const Profile<2> a{H(3), 1.0, Point<2>{1.0, 0.0}}, b{H(7), 1.0, Point<2>{1.0, 0.0}};
  auto f = [&](const Point<2>& x) { return a(x) + 0.05 * b(x); };
  const auto scan = decay_scan<2>(f, Point<2>{}, H(3), 0.5, 4);
  const auto ex = scan.excess_exponents();
  ASSERT_EQ(ex.size(), 4u);
  for (double e : ex) EXPECT_NEAR(e, 2.0, 1e-3);
  EXPECT_DOUBLE_EQ(scan.density, 1.0);
  EXPECT_EQ(scan.csv().columns()[4], "exponent");
}

TEST(DecayScan, LatticeReferenceOnPerturbedSolve) {
  const auto g = build_grid<2>(257);
  DataParams p;
  const auto ref = solve<2>(g, make_boundary_data<2>(DataKind::profile, p));
  p.epsilon = 0.05;
  const auto s = solve<2>(g, make_boundary_data<2>(DataKind::perturbed_profile, p));
  const auto scan = decay_scan_reference<2>(s.u, ref.u, Point<2>{}, H(3), 0.5, 3);
  const auto ex = scan.excess_exponents();
  ASSERT_GE(ex.size(), 2u);
  for (double e : ex) EXPECT_NEAR(e, 2.0, 0.2);
}

TEST(DecayScan, BelowFloorScalesAreMarked) {
  const auto g = build_grid<2>(129);
  const auto f = GridFunction<2>::sample(g, Profile<2>{H(3), 1.0, Point<2>{1.0, 0.0}});
  const auto scan = decay_scan<2>(f, Point<2>{}, H(3), 0.5, 4);
  EXPECT_NE(scan.scales[1].status, ScaleStatus::below_floor);
  EXPECT_EQ(scan.scales[2].status, ScaleStatus::below_floor);
  EXPECT_THROW(decay_scan<2>(f, Point<2>{}, H(3), 0.25, 4), Error);
}

TEST(ContactSet, ThreeHalvesSolveContactsTheNegativeAxis) {
  const auto g = build_grid<2>(129);
  const auto s = solve<2>(g, make_boundary_data<2>(DataKind::profile, DataParams{}));
  const auto cs = contact_set(s);
  ASSERT_FALSE(cs.empty());
  for (std::size_t i : cs.nodes) EXPECT_LE(g.position(i)[0], g.spacing());
  ASSERT_EQ(cs.free_boundary.size(), 1u);
  EXPECT_NEAR(g.position(cs.free_boundary[0])[0], 0.0, g.spacing());
}

TEST(Flatness, PointSets) {
  EXPECT_TRUE(flatness<2>({Point<2>{}}, Point<2>{}, 0.5, 0.1));
  EXPECT_FALSE(flatness<2>({Point<2>{0.1, 0.0}}, Point<2>{}, 0.5, 0.1));
  EXPECT_TRUE(flatness<2>({Point<2>{0.3, 0.0}}, Point<2>{}, 0.5, 0.1));
  EXPECT_TRUE(flatness<3>({Point<3>{0.04, 0.0, 0.0}}, Point<3>{}, 0.5, 0.1));
  EXPECT_FALSE(flatness<3>({Point<3>{0.06, 0.0, 0.0}}, Point<3>{}, 0.5, 0.1));
  EXPECT_THROW(flatness<2>({}, Point<2>{}, 0.5, 0.7), Error);
}

TEST(SequenceWitness, MatchesBruteForce) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t len = 1 + rng() % 24;
    std::vector<int> a(len);
    for (auto& v : a) v = static_cast<int>(rng() % 2);
    for (double p : {1.0 / 3.0, 0.5, 0.75})
      for (std::size_t m = 0; m <= len; ++m) ASSERT_EQ(sequence_witness(a, p, m), brute(a, p, m));
  }
}

TEST(SequenceWitness, HandCases) {
  EXPECT_EQ(sequence_witness({1, 1, 1}, 0.5, 0), 0u);
  EXPECT_EQ(sequence_witness({0, 0, 1}, 0.5, 0), 2u);
  EXPECT_EQ(sequence_witness({1, 0, 0}, 0.5, 0), std::nullopt);
  EXPECT_THROW(sequence_witness({1}, 1.0, 0), Error);
}
