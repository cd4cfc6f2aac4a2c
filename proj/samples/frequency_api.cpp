// Library use without the CLI: solve psi_2 data and print phi(r) at 0.

#include <cstdio>

#include "thinobs/frequency.hpp"

int main() {
  using namespace thinobs;
  DataParams p;
  p.lambda = Homogeneity::halves(4);
  const auto grid = build_grid<2>(257);
  const auto s = solve<2>(grid, make_boundary_data<2>(DataKind::profile, p));
  std::printf("converged %d after %d sweeps\n", s.converged, s.iterations);
  const auto curve = frequency_curve<2>(s.u, Point<2>{}, dyadic_radii(0.5, 8.0 * grid.spacing()));
  for (const auto& row : curve.rows) std::printf("r = %-8g phi = %.4f\n", row.r, row.phi.value_or(0.0));
  const auto est = estimate_frequency<2>(s, Point<2>{});
  std::printf("phi(0+) ~ %.4f in [%.4f, %.4f]\n", est.value, est.lower, est.upper);
}
