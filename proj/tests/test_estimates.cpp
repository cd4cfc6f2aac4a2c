#include <gtest/gtest.h>

#include <cmath>

#include "thinobs/estimates.hpp"

using namespace thinobs;

namespace {

Homogeneity H(int twice) { return Homogeneity::halves(twice); }

struct Pair {
  Solution<2> profile, perturbed;
};

const Pair& lattice_pair() {
  static const Pair p = [] {
    const auto g = build_grid<2>(257);
    DataParams d;
    auto a = solve<2>(g, make_boundary_data<2>(DataKind::profile, d));
    d.epsilon = 0.05;
    auto b = solve<2>(g, make_boundary_data<2>(DataKind::perturbed_profile, d));
    return Pair{std::move(a), std::move(b)};
  }();
  return p;
}

GridFunction<2> lattice_residual() { return lattice_pair().perturbed.u - lattice_pair().profile.u; }

}  // namespace

TEST(LeastSquares, SlopeOfPowerLaw) {
  std::vector<double> x, y;
  for (double r : {0.1, 0.2, 0.4, 0.8}) x.push_back(std::log(r)), y.push_back(std::log(3.0 * std::pow(r, 1.7)));
  EXPECT_NEAR(detail::ls_slope(x, y), 1.7, 1e-12);
}

TEST(Certificate, SuperharmonicPositiveFieldIsRejected) {
  const auto g = build_grid<2>(65);
  // w = 4 - x^2 - y^2 > 0 with Lap w = -4
  const auto w = GridFunction<2>::sample(g, [](const Point<2>& x) { return 4.0 - x[0] * x[0] - x[1] * x[1]; });
  EXPECT_THROW(verify_subharmonic_bounds<2>(w), CertificateError);
  EXPECT_THROW(verify_holder_decay<2>(w, {}), CertificateError);
  EXPECT_THROW(detail::require_certificate<2>(w, 1e-8, "test"), CertificateError);
}

TEST(Subharmonic, LatticeResidualBounds) {
  const auto w = lattice_residual();
  const auto rep = verify_subharmonic_bounds<2>(w);
  EXPECT_GE(rep.certificate_min, -1e-8);
  EXPECT_GT(rep.shell, 0.0);
  EXPECT_GT(rep.sup_ratio, 0.0);
  EXPECT_LT(rep.sup_ratio, 100.0);
  EXPECT_LT(rep.gradient_ratio, 100.0);
  EXPECT_LE(rep.H0_worst_dip, 1e-2);
}

TEST(Barrier, ThreeHalvesSolveSatisfiesInclusions) {
  const auto& s = lattice_pair().profile;
  const auto rep = verify_barrier<2>(s, H(3), 1.0, 0.2);
  EXPECT_TRUE(rep.hard_holds);
  EXPECT_TRUE(rep.easy_holds);
  EXPECT_GT(rep.hard_checked, 0u);
  EXPECT_GT(rep.easy_checked, 0u);
  EXPECT_LE(rep.minimal_delta, 0.2);
  EXPECT_THROW(verify_barrier<2>(s, H(4), 1.0, 0.2), Error);
  EXPECT_THROW(verify_barrier<2>(s, H(3), 0.0, 0.2), Error);
}

TEST(Barrier, PerturbedSolveKeepsTheContactSet) {
  const auto& s = lattice_pair().perturbed;
  const auto rep = verify_barrier<2>(s, H(3), 1.0, 0.2);
  EXPECT_TRUE(rep.hard_holds && rep.easy_holds);
  // eta = sup |u - psi| over B_1 is at least the perturbation at |x| = 1
  EXPECT_GT(rep.eta, 0.05 * psi(H(7), 1.0, 0.0) * 0.9);
}

TEST(LaplacianMass, ExactProfileMassShrinksUnderRefinement) {
  const auto& fine = lattice_pair().profile;
  const auto coarse = solve<2>(build_grid<2>(129), make_boundary_data<2>(DataKind::profile, DataParams{}));
  const auto e = Profile<2>::default_spine();
  const auto a = verify_laplacian_mass<2>(coarse, H(3), 1.0, e, 0.2);
  const auto b = verify_laplacian_mass<2>(fine, H(3), 1.0, e, 0.2);
  EXPECT_NEAR(b.profile_term, std::pow(0.2, 1.5), 1e-12);
  EXPECT_LT(b.lhs, 0.05 * b.profile_term);
  EXPECT_LT(b.lhs, 0.75 * a.lhs);
}

TEST(WLapW, ZeroFieldIsDegenerate) {
  const GridFunction<2> w(build_grid<2>(65));
  const auto rep = verify_nonlinear_wlapw<2>(w, {0.25, 0.5});
  EXPECT_TRUE(rep.degenerate);
}

TEST(WLapW, LatticeResidualIsNearlyFlat) {
  const auto rep = verify_nonlinear_wlapw<2>(lattice_residual(), {0.125, 0.25, 0.5});
  EXPECT_FALSE(rep.degenerate);
  EXPECT_EQ(rep.rows.size(), 3u);
  // w Lap w vanishes in the continuum; the lattice sum is roundoff relative to the shell norm
  for (const auto& row : rep.rows) EXPECT_LT(std::abs(row.ratio), 1e-6);
  EXPECT_EQ(rep.csv().size(), 3u);
}

TEST(Holder, LatticeResidualDecaysNearTheEdge) {
  const auto rep = verify_holder_decay<2>(lattice_residual(), {});
  EXPECT_GE(rep.rows.size(), 3u);
  EXPECT_GT(rep.alpha, 0.3);
  EXPECT_GT(rep.constant, 0.0);
}

TEST(TangentialDifference, LinearField) {
  const auto g = build_grid<3>(17, 1.0);
  const auto f = GridFunction<3>::sample(g, [](const Point<3>& x) { return 2.0 * x[0] - x[1] + x[2]; });
  const auto d0 = tangential_difference<3>(f, 0);
  const auto d1 = tangential_difference<3>(f, 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(d0[i], 2.0, 1e-12);
    EXPECT_NEAR(d1[i], -1.0, 1e-12);
  }
  EXPECT_THROW(tangential_difference<3>(f, 2), Error);
}

TEST(FrequencyComparison, TranslationInvariantProfileIn3D) {
  // spine e_2: the solution does not depend on x_1, so shifting along e_1 changes nothing
  const auto g = build_grid<3>(65);
  const auto s = solve<3>(g, make_boundary_data<3>(DataKind::profile, DataParams{}));
  const auto rep = verify_frequency_comparison<3>(s, Point<3>{0.25, 0.0, 0.0}, 0.25);
  EXPECT_LT(rep.deviation, 1e-2);
  EXPECT_LT(rep.tangential_ratio, 1e-3);
  EXPECT_THROW(verify_frequency_comparison<3>(s, Point<3>{0.0, 1.0, 0.0}, 0.25), Error);
}
