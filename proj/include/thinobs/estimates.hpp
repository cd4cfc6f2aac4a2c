#pragma once

// Empirical checks of the elliptic, barrier, Laplacian-mass, nonlinear and
// Hoelder estimates on computed fields. Every routine returns measured
// constants; none asserts an inequality with an unknown universal constant.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "thinobs/error.hpp"
#include "thinobs/frequency.hpp"
#include "thinobs/geometry.hpp"
#include "thinobs/profiles.hpp"
#include "thinobs/report.hpp"
#include "thinobs/solver.hpp"

namespace thinobs {

namespace detail {

// Lattice weight of a node in an integral over a ball centred on the thin
// plane: nodes above the plane stand for themselves and their mirror image.
template <int Dim>
double node_weight(const Grid<Dim>& grid, std::size_t i) {
  const double cell = std::pow(grid.spacing(), Dim);
  return grid.kind(i) == NodeKind::thin ? cell : 2.0 * cell;
}

template <int Dim>
double max_abs(const GridFunction<Dim>& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

// Smallest f Lap_h f over non-outer nodes.
template <int Dim>
double certificate_min(const GridFunction<Dim>& f) {
  const auto& grid = f.grid();
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.kind(i) != NodeKind::outer) m = std::min(m, f[i] * discrete_laplacian<Dim>(f, i));
  return m;
}

template <int Dim>
void require_certificate(const GridFunction<Dim>& f, double tol, const std::string& who) {
  const double m = certificate_min(f);
  if (m < -tol)
    throw CertificateError(who + ": certificate w Lap_h w >= -" + format_number(tol) + " fails (min " +
                           format_number(m) + ")");
}

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Central-difference gradient at a non-outer node (zero normal part on
// thin nodes by the even reflection).
template <int Dim>
Point<Dim> node_gradient(const GridFunction<Dim>& f, std::size_t i) {
  const auto& grid = f.grid();
  const double h = grid.spacing();
  Point<Dim> g{};
  for (int k = 0; k < Dim - 1; ++k) {
    const std::size_t st = grid.stride(k);
    g[k] = (f[i + st] - f[i - st]) / (2.0 * h);
  }
  if (grid.kind(i) != NodeKind::thin) g[Dim - 1] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  return g;
}

}  // namespace detail

struct SubharmonicReport {
  double scale = 1.0;
  double h = 0.0;
  double certificate_min = 0.0;
  double sup = 0.0;          // sup over B_{3/2} of |w_rho|
  double gradient = 0.0;     // ||grad w_rho||_{L^2(B_{3/2})}
  double shell = 0.0;        // ||w_rho||_{L^2(B_2 \ B_1)}
  double sup_ratio = 0.0;
  double gradient_ratio = 0.0;
  double H0_worst_dip = 0.0;

  Record record() const {
    Record r;
    r.add("scale", scale).add("h", h).add("certificate_min", certificate_min).add("sup", sup);
    r.add("gradient_l2", gradient).add("shell_l2", shell).add("sup_ratio", sup_ratio);
    r.add("gradient_ratio", gradient_ratio).add("H0_worst_dip", H0_worst_dip);
    return r;
  }
};

/// Elliptic bounds for w with w Lap w >= 0, at the scale rho (the lemma's
/// unit balls become B_{3 rho/2}, B_{2 rho}). Default rho = R/2.
template <int Dim>
SubharmonicReport verify_subharmonic_bounds(const GridFunction<Dim>& w, double cert_tol = 1e-8, double rho = 0.0) {
  const auto& grid = w.grid();
  if (rho <= 0.0) rho = 0.5 * grid.half_width();
  const Point<Dim> o{};
  if (!grid.contains_ball(o, 2.0 * rho)) throw Error("verify_subharmonic_bounds: B_{2 rho} exits the domain");
  SubharmonicReport rep;
  rep.scale = rho;
  rep.h = grid.spacing();
  rep.certificate_min = detail::certificate_min(w);
  if (rep.certificate_min < -cert_tol)
    throw CertificateError("verify_subharmonic_bounds: w Lap_h w = " + format_number(rep.certificate_min) +
                           " below -" + format_number(cert_tol));
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (norm<Dim>(grid.position(i)) <= 1.5 * rho) rep.sup = std::max(rep.sup, std::abs(w[i]));
  const double grad_sq = integrate_ball<Dim>(w, o, 1.5 * rho, [](double, const Point<Dim>& g, const Point<Dim>&) {
    return dot<Dim>(g, g);
  });
  rep.gradient = std::sqrt(grad_sq * std::pow(rho, 2.0 - Dim));
  rep.shell = std::sqrt(shell_l2_sq<Dim>(w, o, rho));
  if (rep.shell > 0.0) {
    rep.sup_ratio = rep.sup / rep.shell;
    rep.gradient_ratio = rep.gradient / rep.shell;
  }
  std::vector<double> H;
  const double r_min = 8.0 * grid.spacing(), r_max = 2.0 * rho;
  for (double r = r_min; r <= r_max * (1.0 + 1e-12); r *= std::pow(2.0, 0.25))
    H.push_back(boundary_mass<Dim>(w, o, r));
  if (H.size() >= 3) rep.H0_worst_dip = check_monotone(H, 0.0, "H0", 1e-300).worst_dip;
  return rep;
}

struct BarrierReport {
  double delta = 0.0;
  double eta = 0.0;  // sup over lattice nodes in B_1 of |u - tau psi|
  double tau = 0.0;
  std::size_t hard_checked = 0, hard_violations = 0;
  std::size_t easy_checked = 0, easy_violations = 0;
  bool hard_holds = true;
  bool easy_holds = true;
  double constant = 0.0;  // C with C eta = tau delta^lambda
  double minimal_delta = 0.0;  // smallest delta for which all inclusions hold

  Record record() const {
    Record r;
    r.add("delta", delta).add("eta", eta).add("tau", tau).add("hard_checked", hard_checked);
    r.add("hard_violations", hard_violations).add("hard_holds", hard_holds).add("easy_checked", easy_checked);
    r.add("easy_violations", easy_violations).add("easy_holds", easy_holds).add("constant", constant);
    r.add("minimal_delta", minimal_delta);
    return r;
  }
};

/// Barrier inclusions for a solve against tau psi_lambda with spine e,
/// exhaustively over thin nodes. Half-odd lambda: contact on B_{1-delta} ∩
/// {x.e < -delta}, positivity on B_1 ∩ {x.e > delta}. Odd lambda: contact on
/// B_{1-delta} ∩ {|x.e| > delta}.
template <int Dim>
BarrierReport verify_barrier(const Solution<Dim>& s, Homogeneity lambda, double tau, double delta,
                             Point<Dim> spine = Profile<Dim>::default_spine(), double zero_tol = -1.0) {
  if (!(lambda.is_three_halves_family() || lambda.is_odd()))
    throw Error("verify_barrier: lambda must lie in 3/2 + 2N or be odd, got " + lambda.str());
  if (!(tau > 0.0)) throw Error("verify_barrier: tau must be positive");
  const auto& grid = s.grid();
  if (!grid.contains_ball(Point<Dim>{}, 1.0)) throw Error("verify_barrier: B_1 exits the domain");
  if (zero_tol < 0.0) zero_tol = contact_tolerance(s);
  const Profile<Dim> q{lambda, tau, spine};
  BarrierReport rep;
  rep.delta = delta;
  rep.tau = tau;
  double hard_needed = 0.0, easy_needed = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.position(i);
    const double rad = norm<Dim>(x);
    if (rad > 1.0 || grid.kind(i) == NodeKind::outer) continue;
    rep.eta = std::max(rep.eta, std::abs(s.u[i] - q(x)));
    if (grid.kind(i) != NodeKind::thin) continue;
    const double t = dot<Dim>(x, spine);
    const bool contact = s.u[i] <= zero_tol;
    // A node x with x.e = -d, |x| = 1 - d' is inside the hard region for
    // every delta < min(d, d'); similarly for the easy region.
    const double side = lambda.is_odd() ? std::abs(t) : -t;
    if (side > 0.0) {
      const double reach = std::min(side, 1.0 - rad);
      if (rad < 1.0 - delta && side > delta) {
        ++rep.hard_checked;
        if (!contact) ++rep.hard_violations;
      }
      if (!contact) hard_needed = std::max(hard_needed, reach);
    }
    if (!lambda.is_odd() && t > 0.0) {
      if (t > delta) {
        ++rep.easy_checked;
        if (contact) ++rep.easy_violations;
      }
      if (contact) easy_needed = std::max(easy_needed, t);
    }
  }
  rep.hard_holds = rep.hard_violations == 0;
  rep.easy_holds = rep.easy_violations == 0;
  rep.constant = rep.eta > 0.0 ? tau * std::pow(delta, lambda.value()) / rep.eta : std::numeric_limits<double>::infinity();
  rep.minimal_delta = std::max(hard_needed, easy_needed);
  return rep;
}

struct LaplacianMassReport {
  double delta = 0.0;
  double lhs = 0.0;            // int_{C_delta ∩ B_1} |Lap w|
  double profile_term = 0.0;   // tau delta^lambda
  double shell_term = 0.0;     // ||w||_{L^2(B_2 \ B_1)}
  double constant = 0.0;       // lhs / (profile_term + shell_term)

  Record record() const {
    Record r;
    r.add("delta", delta).add("lhs", lhs).add("tau_delta_lambda", profile_term).add("shell_l2", shell_term);
    r.add("constant", constant);
    return r;
  }
};

/// |Lap w| mass of w = u - tau psi_lambda o S over the cylinder C_delta ∩ B_1.
/// On thin nodes the singular part is Lap_h u h - tau rho_psi per unit thin
/// area; off the plane both fields are harmonic up to the solver residual.
template <int Dim>
LaplacianMassReport verify_laplacian_mass(const Solution<Dim>& s, Homogeneity lambda, double tau,
                                          Point<Dim> spine, double delta) {
  if (!(lambda.is_three_halves_family() || lambda.is_odd()))
    throw Error("verify_laplacian_mass: lambda must lie in 3/2 + 2N or be odd, got " + lambda.str());
  const auto& grid = s.grid();
  const double h = grid.spacing();
  const Point<Dim> o{};
  if (!grid.contains_ball(o, 2.0)) throw Error("verify_laplacian_mass: B_2 exits the domain");
  const Profile<Dim> q{lambda, tau, spine};
  const auto w = s.u - GridFunction<Dim>::sample(grid, q);
  LaplacianMassReport rep;
  rep.delta = delta;
  const double area = std::pow(h, Dim - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.kind(i) == NodeKind::outer) continue;
    const auto x = grid.position(i);
    if (norm<Dim>(x) > 1.0) continue;
    const double t = dot<Dim>(x, spine);
    if (t * t + x[Dim - 1] * x[Dim - 1] > delta * delta) continue;
    if (grid.kind(i) == NodeKind::thin) {
      const double density = discrete_laplacian<Dim>(s.u, i) * h - laplacian_density<Dim>(lambda, tau, spine, x);
      rep.lhs += std::abs(density) * area;
    } else {
      rep.lhs += std::abs(discrete_laplacian<Dim>(w, i)) * detail::node_weight(grid, i);
    }
  }
  rep.profile_term = tau * std::pow(delta, lambda.value());
  rep.shell_term = std::sqrt(shell_l2_sq<Dim>(w, o, 1.0));
  const double rhs = rep.profile_term + rep.shell_term;
  rep.constant = rhs > 0.0 ? rep.lhs / rhs : 0.0;
  return rep;
}

struct WLapWRow {
  double r = 0.0;
  double abs_integral = 0.0;   // int_{B_1} |w_r Lap w_r|
  double radial_integral = 0.0;  // -int_{B_1} (x . grad w_r) Lap w_r
  double shell_sq = 0.0;       // ||w_r||^2_{L^2(B_2 \ B_1)}
  double ratio = 0.0;          // abs_integral / shell_sq
  double radial_ratio = 0.0;   // radial_integral / shell_sq
};

struct WLapWReport {
  double h = 0.0;
  bool degenerate = false;
  double abs_integral = 0.0;  // at r = 1
  double shell = 0.0;         // ||w||_{L^2(B_2 \ B_1)}
  double exponent = 0.0;      // least-squares slope of log ratio against log r
  double kappa = 0.0;         // exponent used for the radial floor
  double floor_constant = 0.0;  // smallest C with radial_ratio >= -C r^kappa
  double radial_min = 0.0;
  std::vector<WLapWRow> rows;

  Record record() const {
    Record r;
    r.add("h", h).add("degenerate", degenerate).add("abs_integral", abs_integral).add("shell_l2", shell);
    r.add("exponent", exponent).add("kappa", kappa).add("floor_constant", floor_constant).add("radial_min", radial_min);
    return r;
  }

  CsvTable csv() const {
    CsvTable t({"r", "abs_wlapw", "radial_wlapw", "shell_sq", "ratio", "radial_ratio"});
    for (const auto& row : rows)
      t.add_row(std::vector<double>{row.r, row.abs_integral, row.radial_integral, row.shell_sq, row.ratio,
                                    row.radial_ratio});
    return t;
  }
};

/// The nonlinear quantities of a residual field w centred at the origin on
/// the thin plane: int |w_r Lap w_r| and -int (x . grad w_r) Lap w_r against
/// ||w_r||^2 on the unit shell, for each radius. kappa <= 0 uses the fitted
/// exponent.
template <int Dim>
WLapWReport verify_nonlinear_wlapw(const GridFunction<Dim>& w, const std::vector<double>& radii, double kappa = 0.0) {
  const auto& grid = w.grid();
  WLapWReport rep;
  rep.h = grid.spacing();
  const Point<Dim> o{};
  if (!grid.contains_ball(o, 2.0)) throw Error("verify_nonlinear_wlapw: B_2 exits the domain");
  const auto lap = discrete_laplacian<Dim>(w);
  std::vector<double> rad(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) rad[i] = norm<Dim>(grid.position(i));
  auto integrals = [&](double r, double& abs_part, double& radial_part) {
    abs_part = radial_part = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (rad[i] > r || grid.kind(i) == NodeKind::outer) continue;
      const double wt = detail::node_weight(grid, i);
      abs_part += std::abs(w[i] * lap[i]) * wt;
      radial_part -= dot<Dim>(grid.position(i), detail::node_gradient(w, i)) * lap[i] * wt;
    }
    const double scale = std::pow(r, 2.0 - Dim);
    abs_part *= scale;
    radial_part *= scale;
  };
  double radial_dummy = 0.0;
  integrals(1.0, rep.abs_integral, radial_dummy);
  rep.shell = std::sqrt(shell_l2_sq<Dim>(w, o, 1.0));
  rep.degenerate = rep.shell <= 1e-14 || detail::max_abs(w) <= 1e-12;
  std::vector<double> lx, ly;
  for (double r : radii) {
    if (r < 4.0 * grid.spacing() * (1.0 - 1e-12)) throw Error("verify_nonlinear_wlapw: radius below the 4h floor");
    WLapWRow row;
    row.r = r;
    integrals(r, row.abs_integral, row.radial_integral);
    row.shell_sq = shell_l2_sq<Dim>(w, o, r);
    if (row.shell_sq > 0.0) {
      row.ratio = row.abs_integral / row.shell_sq;
      row.radial_ratio = row.radial_integral / row.shell_sq;
    }
    if (row.ratio > 0.0) {
      lx.push_back(std::log(r));
      ly.push_back(std::log(row.ratio));
    }
    rep.rows.push_back(row);
  }
  if (lx.size() >= 2) rep.exponent = detail::ls_slope(lx, ly);
  rep.kappa = kappa > 0.0 ? kappa : std::max(rep.exponent, 0.0);
  rep.radial_min = std::numeric_limits<double>::infinity();
  for (const auto& row : rep.rows) {
    rep.radial_min = std::min(rep.radial_min, row.radial_ratio);
    rep.floor_constant = std::max(rep.floor_constant, -row.radial_ratio / std::pow(row.r, rep.kappa));
  }
  return rep;
}

/// Residual w = u - tau psi_lambda o S of a solve.
template <int Dim>
GridFunction<Dim> profile_residual(const Solution<Dim>& s, Homogeneity lambda, double tau,
                                   Point<Dim> spine = Profile<Dim>::default_spine()) {
  return s.u - GridFunction<Dim>::sample(s.grid(), Profile<Dim>{lambda, tau, spine});
}

template <int Dim>
WLapWReport verify_nonlinear_wlapw(const Solution<Dim>& s, Homogeneity lambda, double tau, Point<Dim> spine,
                                   const std::vector<double>& radii, double kappa = 0.0) {
  return verify_nonlinear_wlapw<Dim>(profile_residual<Dim>(s, lambda, tau, spine), radii, kappa);
}

struct HolderRow {
  double delta = 0.0;
  double sup = 0.0;    // sup over N_{2 delta} ∩ B_{1/2} of |f|
  double ratio = 0.0;  // sup / ||f||_{L^2(B_1 \ B_{1/2})}
};

struct HolderReport {
  double h = 0.0;
  double shell = 0.0;
  double alpha = 0.0;     // least-squares slope of log ratio against log delta
  double constant = 0.0;  // max ratio / delta^alpha
  std::vector<HolderRow> rows;

  Record record() const {
    Record r;
    r.add("h", h).add("shell_l2", shell).add("alpha", alpha).add("constant", constant).add("deltas", rows.size());
    return r;
  }

  CsvTable csv() const {
    CsvTable t({"delta", "sup", "ratio"});
    for (const auto& row : rows) t.add_row(std::vector<double>{row.delta, row.sup, row.ratio});
    return t;
  }
};

/// Deltas 0.045 2^{-k/4} down to 2h.
template <int Dim>
std::vector<double> holder_deltas(const Grid<Dim>& grid) {
  std::vector<double> out;
  for (double d = 0.045; d >= 2.0 * grid.spacing() * (1.0 - 1e-12); d *= std::pow(2.0, -0.25)) out.push_back(d);
  return out;
}

/// Hoelder decay near the edge of {x.e <= 0} for f with f Lap f >= 0 that
/// vanishes on thin nodes with x.e < -delta (checked for the smallest delta).
template <int Dim>
HolderReport verify_holder_decay(const GridFunction<Dim>& f, std::vector<double> deltas,
                                 Point<Dim> spine = Profile<Dim>::default_spine(), double cert_tol = 1e-8,
                                 double vanish_tol = 1e-12) {
  const auto& grid = f.grid();
  if (deltas.empty()) deltas = holder_deltas(grid);
  for (double d : deltas)
    if (!(d > 0.0 && d < 0.05)) throw Error("verify_holder_decay: delta must lie in (0, 1/20)");
  detail::require_certificate(f, cert_tol, "verify_holder_decay");
  const double dmin = *std::min_element(deltas.begin(), deltas.end());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.kind(i) != NodeKind::thin) continue;
    const auto x = grid.position(i);
    if (norm<Dim>(x) < 1.0 && dot<Dim>(x, spine) < -dmin && std::abs(f[i]) > vanish_tol)
      throw Error("verify_holder_decay: f does not vanish on the thin nodes with x.e < -" + format_number(dmin));
  }
  const Point<Dim> o{};
  HolderReport rep;
  rep.h = grid.spacing();
  rep.shell = std::sqrt(std::max(0.0, ball_l2_sq<Dim>(f, o, 1.0) - ball_l2_sq<Dim>(f, o, 0.5)));
  std::vector<double> lx, ly;
  for (double d : deltas) {
    HolderRow row;
    row.delta = d;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto x = grid.position(i);
      if (norm<Dim>(x) >= 0.5) continue;
      const double t = std::max(0.0, dot<Dim>(x, spine));
      if (t * t + x[Dim - 1] * x[Dim - 1] <= 4.0 * d * d) row.sup = std::max(row.sup, std::abs(f[i]));
    }
    row.ratio = rep.shell > 0.0 ? row.sup / rep.shell : 0.0;
    if (row.ratio > 0.0) {
      lx.push_back(std::log(d));
      ly.push_back(std::log(row.ratio));
    }
    rep.rows.push_back(row);
  }
  if (lx.size() >= 2) rep.alpha = detail::ls_slope(lx, ly);
  for (const auto& row : rep.rows)
    if (row.ratio > 0.0) rep.constant = std::max(rep.constant, row.ratio / std::pow(row.delta, rep.alpha));
  return rep;
}

struct FrequencyComparisonReport {
  double r = 0.0;
  double offset = 0.0;        // |x0|
  double phi_origin = 0.0;    // phi(r, u)
  double phi_shifted = 0.0;   // phi(r, u(x0 + .))
  double phi_4r = 0.0;
  double deviation = 0.0;     // |phi_origin / phi_shifted - 1|
  double constant = 0.0;      // deviation r / |x0|
  double base = 0.0;          // constant^{1 / phi(4r)}
  double tangential_ratio = 0.0;  // ||grad d_e u||_{L^2(B_1)} / ||u||_{L^2(B_2 \ B_1)}

  Record record() const {
    Record rec;
    rec.add("r", r).add("offset", offset).add("phi_origin", phi_origin).add("phi_shifted", phi_shifted);
    rec.add("phi_4r", phi_4r).add("deviation", deviation).add("constant", constant).add("base", base);
    rec.add("tangential_ratio", tangential_ratio);
    return rec;
  }
};

/// Central tangential difference d_e u with one-sided differences next to
/// the outer boundary (e a lattice axis of the thin space).
template <int Dim>
GridFunction<Dim> tangential_difference(const GridFunction<Dim>& u, int axis) {
  if (axis < 0 || axis >= Dim - 1) throw Error("tangential_difference: axis must lie in the thin space");
  const auto& grid = u.grid();
  const double h = grid.spacing();
  const std::size_t st = grid.stride(axis);
  GridFunction<Dim> out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const int j = grid.multi_index(i)[axis];
    if (j == 0) out[i] = (u[i + st] - u[i]) / h;
    else if (j == grid.resolution() - 1) out[i] = (u[i] - u[i - st]) / h;
    else out[i] = (u[i + st] - u[i - st]) / (2.0 * h);
  }
  return out;
}

template <int Dim>
FrequencyComparisonReport verify_frequency_comparison(const Solution<Dim>& s, const Point<Dim>& x0, double r,
                                                      int axis = 0) {
  const auto& grid = s.grid();
  const Point<Dim> o{};
  const double reach = 8.0 * grid.spacing();
  if (!near_contact(s, o, reach)) throw Error("verify_frequency_comparison: 0 is not a contact point");
  if (!near_contact(s, x0, reach)) throw Error("verify_frequency_comparison: x0 is not a contact point");
  if (!grid.contains_ball(o, 4.0 * r)) throw Error("verify_frequency_comparison: B_{4r} exits the domain");
  if (!grid.contains_ball(x0, r)) throw Error("verify_frequency_comparison: B_r(x0) exits the domain");
  FrequencyComparisonReport rep;
  rep.r = r;
  rep.offset = norm<Dim>(x0);
  auto phi = [&](const Point<Dim>& c, double rr) {
    const double H = boundary_mass<Dim>(s.u, c, rr);
    if (!(H > 0.0)) throw Error("verify_frequency_comparison: vanishing boundary mass");
    return ball_energy<Dim>(s.u, c, rr) / H;
  };
  rep.phi_origin = phi(o, r);
  rep.phi_shifted = phi(x0, r);
  rep.phi_4r = phi(o, 4.0 * r);
  rep.deviation = std::abs(rep.phi_origin / rep.phi_shifted - 1.0);
  if (rep.offset > 0.0) {
    rep.constant = rep.deviation * r / rep.offset;
    rep.base = std::pow(rep.constant, 1.0 / rep.phi_4r);
  }
  const double rho = 0.5 * grid.half_width();
  const auto du = tangential_difference<Dim>(s.u, axis);
  const double grad_sq = integrate_ball<Dim>(du, o, rho, [](double, const Point<Dim>& g, const Point<Dim>&) {
    return dot<Dim>(g, g);
  });
  const double shell = std::sqrt(shell_l2_sq<Dim>(s.u, o, rho) * std::pow(rho, Dim));
  if (shell > 0.0) rep.tangential_ratio = std::sqrt(grad_sq) / shell;
  return rep;
}

}  // namespace thinobs
