#pragma once

// Boundary mass H_mu, scaled energy D, Almgren frequency phi, truncated
// frequency phi_gamma, the shell ratio g_gamma and the Monneau-type maximum.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "thinobs/error.hpp"
#include "thinobs/geometry.hpp"
#include "thinobs/report.hpp"
#include "thinobs/solver.hpp"

namespace thinobs {

template <int Dim>
int default_angular_nodes() {
  return Dim == 2 ? 1024 : 128;
}

struct FrequencyRow {
  double r = 0.0;
  double H0 = 0.0;
  double D = 0.0;
  std::optional<double> phi;
  std::vector<double> H_mu;
  std::vector<double> phi_gamma;
  std::vector<double> g_gamma;
};

template <int Dim>
struct FrequencyCurve {
  Point<Dim> center{};
  double h = 0.0;
  std::vector<double> mus;
  std::vector<double> gammas;
  std::vector<FrequencyRow> rows;

  std::vector<double> radii() const {
    std::vector<double> v;
    for (const auto& row : rows) v.push_back(row.r);
    return v;
  }
  std::vector<double> H0() const {
    std::vector<double> v;
    for (const auto& row : rows) v.push_back(row.H0);
    return v;
  }
  std::vector<double> phi() const {
    std::vector<double> v;
    for (const auto& row : rows) v.push_back(row.phi.value_or(std::numeric_limits<double>::quiet_NaN()));
    return v;
  }
  std::vector<double> phi_gamma(std::size_t k) const {
    std::vector<double> v;
    for (const auto& row : rows) v.push_back(row.phi_gamma.at(k));
    return v;
  }
  std::vector<double> H_mu(std::size_t k) const {
    std::vector<double> v;
    for (const auto& row : rows) v.push_back(row.H_mu.at(k));
    return v;
  }

  CsvTable csv() const {
    std::vector<std::string> cols{"r", "H0", "D", "phi"};
    for (double m : mus) cols.push_back("H_mu=" + format_number(m));
    for (double g : gammas) cols.push_back("phi_gamma=" + format_number(g));
    for (double g : gammas) cols.push_back("g_gamma=" + format_number(g));
    CsvTable t(cols);
    for (const auto& row : rows) {
      std::vector<std::string> cells{format_number(row.r), format_number(row.H0), format_number(row.D),
                                     row.phi ? format_number(*row.phi) : std::string("")};
      for (double v : row.H_mu) cells.push_back(format_number(v));
      for (double v : row.phi_gamma) cells.push_back(format_number(v));
      for (double v : row.g_gamma) cells.push_back(format_number(v));
      t.add_row(cells);
    }
    return t;
  }
};

/// H_0(r) = int_{dB_1} f(x0 + r .)^2.
template <int Dim>
double boundary_mass(const GridFunction<Dim>& f, const Point<Dim>& x0, double r, int m = default_angular_nodes<Dim>()) {
  return sample_sphere<Dim>(f, x0, r, m).integral_sq();
}

/// Radii r_0 2^{-k} down to the floor (inclusive), returned increasing.
inline std::vector<double> dyadic_radii(double r_max, double r_min) {
  std::vector<double> out;
  for (double r = r_max; r >= r_min * (1.0 - 1e-12); r *= 0.5) out.push_back(r);
  std::reverse(out.begin(), out.end());
  return out;
}

template <int Dim>
FrequencyCurve<Dim> frequency_curve(const GridFunction<Dim>& f, const Point<Dim>& x0, const std::vector<double>& radii,
                                    const std::vector<double>& mus = {}, const std::vector<double>& gammas = {},
                                    int m = default_angular_nodes<Dim>()) {
  FrequencyCurve<Dim> curve;
  curve.center = x0;
  curve.h = f.grid().spacing();
  curve.mus = mus;
  curve.gammas = gammas;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (i > 0 && !(radii[i] > radii[i - 1])) throw Error("frequency radii must be strictly increasing");
    if (!gammas.empty() && !f.grid().contains_ball(x0, 2.0 * radii[i]))
      throw Error("the 2r shell of g_gamma exits the grid domain");
  }
  for (double r : radii) {
    FrequencyRow row;
    row.r = r;
    row.H0 = boundary_mass<Dim>(f, x0, r, m);
    row.D = ball_energy<Dim>(f, x0, r);
    if (row.H0 >= 1e-300) row.phi = row.D / row.H0;
    for (double mu : mus) row.H_mu.push_back(std::pow(r, -2.0 * mu) * row.H0);
    if (!gammas.empty()) {
      const double shell = shell_l2_sq<Dim>(f, x0, r);
      for (double g : gammas) {
        const double t = std::pow(r, 2.0 * g);
        row.phi_gamma.push_back((row.D + g * t) / (row.H0 + t));
        row.g_gamma.push_back(shell / (row.H0 + t));
      }
    }
    curve.rows.push_back(std::move(row));
  }
  return curve;
}

struct MonneauValue {
  double value = 0.0;  // max over s in [1,2] of H_mu(s r)
  double s = 1.0;      // maximizer
};

/// H~_mu(r) = max_{s in [1,2]} H_mu(s r): a uniform scan followed by rounds
/// of three-point parabolic refinement around the best sample.
template <int Dim>
MonneauValue monneau_max(const GridFunction<Dim>& f, const Point<Dim>& x0, double mu, double r, int samples = 33,
                         int refinements = 2, int m = default_angular_nodes<Dim>()) {
  if (samples < 33) throw Error("monneau_max needs at least 33 samples");
  if (!f.grid().contains_ball(x0, 2.0 * r)) throw Error("monneau_max: sphere of radius 2r exits the grid domain");
  auto H = [&](double s) { return std::pow(s * r, -2.0 * mu) * boundary_mass<Dim>(f, x0, s * r, m); };
  MonneauValue best{-std::numeric_limits<double>::infinity(), 1.0};
  std::vector<double> vals(samples);
  for (int k = 0; k < samples; ++k) {
    const double s = 1.0 + static_cast<double>(k) / (samples - 1);
    vals[k] = H(s);
    if (vals[k] > best.value) best = {vals[k], s};
  }
  double step = 1.0 / (samples - 1);
  for (int round = 0; round < refinements; ++round) {
    const double lo = std::max(1.0, best.s - step), hi = std::min(2.0, best.s + step);
    if (hi - lo < 1.5 * step) break;  // maximizer at an end point
    const double fl = H(lo), fm = best.value, fh = H(hi);
    const double denom = fl - 2.0 * fm + fh;
    if (denom < 0.0) {
      const double s = std::clamp(best.s + 0.5 * step * (fl - fh) / denom, lo, hi);
      const double v = H(s);
      if (v > best.value) best = {v, s};
    }
    step *= 0.5;
  }
  return best;
}

struct MonotonicityReport {
  std::string name;
  double worst_dip = 0.0;
  std::size_t location = 0;  // index i of the worst pair (i, i+1)
  double allowance = 0.0;
  bool pass = true;

  Record record() const {
    Record r;
    r.add("functional", name).add("worst_dip", worst_dip).add("location", location).add("allowance", allowance).add("pass", pass);
    return r;
  }
};

/// Worst relative dip max(0, (v_i - v_{i+1}) / max(|v_i|, floor)) over
/// consecutive samples; passes iff it is at most `allowance`.
inline MonotonicityReport check_monotone(const std::vector<double>& values, double allowance,
                                         const std::string& name = "", double floor = 1e-300) {
  if (values.size() < 3) throw Error("check_monotone needs at least 3 values");
  MonotonicityReport rep;
  rep.name = name;
  rep.allowance = allowance;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double dip = std::max(0.0, (values[i] - values[i + 1]) / std::max(std::abs(values[i]), floor));
    if (dip > rep.worst_dip) {
      rep.worst_dip = dip;
      rep.location = i;
    }
  }
  rep.pass = rep.worst_dip <= allowance;
  return rep;
}

struct HRatioReport {
  double lambda_upper = 0.0;
  double lambda_lower = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double C2 = 0.0;  // smallest C2 with ratio <= C2 (R/r)^{2 lambda_upper + delta}
  double C3 = 0.0;  // largest C3 with ratio >= C3 (R/r)^{2 lambda_lower}
  double slope = 0.0;  // least-squares slope of log(H0 + r^{2 gamma}) against log r
  bool slope_in_window = false;
  double sup_phi_gamma = 0.0;

  Record record() const {
    Record r;
    r.add("lambda_upper", lambda_upper).add("lambda_lower", lambda_lower).add("gamma", gamma).add("delta", delta);
    r.add("C2", C2).add("C3", C3).add("slope", slope).add("slope_in_window", slope_in_window);
    r.add("sup_phi_gamma", sup_phi_gamma);
    return r;
  }
};

/// Two-sided power bounds on (H0(R) + R^{2 gamma}) / (H0(r) + r^{2 gamma})
/// over all radius pairs of the curve, with the constants fitted.
template <int Dim>
HRatioReport h_ratio_bounds(const FrequencyCurve<Dim>& curve, double lambda_upper, double lambda_lower, double gamma,
                            double delta = 0.1) {
  if (curve.rows.size() < 2) throw Error("h_ratio_bounds needs at least two radii");
  HRatioReport rep;
  rep.lambda_upper = lambda_upper;
  rep.lambda_lower = lambda_lower;
  rep.gamma = gamma;
  rep.delta = delta;
  rep.C3 = std::numeric_limits<double>::infinity();
  std::vector<double> lx, ly;
  for (const auto& row : curve.rows) {
    lx.push_back(std::log(row.r));
    ly.push_back(std::log(row.H0 + std::pow(row.r, 2.0 * gamma)));
    const double D = row.D, t = std::pow(row.r, 2.0 * gamma);
    rep.sup_phi_gamma = std::max(rep.sup_phi_gamma, (D + gamma * t) / (row.H0 + t));
  }
  for (std::size_t i = 0; i < lx.size(); ++i)
    for (std::size_t j = i + 1; j < lx.size(); ++j) {
      const double log_ratio = ly[j] - ly[i];
      const double log_scale = lx[j] - lx[i];
      rep.C2 = std::max(rep.C2, std::exp(log_ratio - (2.0 * lambda_upper + delta) * log_scale));
      rep.C3 = std::min(rep.C3, std::exp(log_ratio - 2.0 * lambda_lower * log_scale));
    }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  rep.slope_in_window = rep.slope >= 2.0 * lambda_lower - 1e-9 && rep.slope <= 2.0 * lambda_upper + delta + 1e-9;
  return rep;
}

struct FrequencyEstimate {
  double value = 0.0;       // linear-in-r extrapolation to r = 0
  double phi_min = 0.0;     // phi at the smallest reliable radius
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> radii;
  std::vector<double> phis;

  Record record() const {
    Record r;
    r.add("estimate", value).add("phi_rmin", phi_min).add("window_lower", lower).add("window_upper", upper);
    return r;
  }
};

/// Thin-node value threshold below which a node counts as contact: the
/// nodal error tol R^2 of a solve stopped at Laplacian residual tol.
template <int Dim>
double contact_tolerance(const Solution<Dim>& s) {
  const double R = s.grid().half_width();
  return std::max(s.tol * R * R, 1e-13);
}

/// True when x0 is a thin lattice node in the discrete contact set.
template <int Dim>
bool is_contact_point(const Solution<Dim>& s, const Point<Dim>& x0, double zero_tol = -1.0) {
  const auto& grid = s.grid();
  if (zero_tol < 0.0) zero_tol = contact_tolerance(s);
  if (std::abs(x0[Dim - 1]) > 1e-12) return false;
  Index<Dim> ijk{};
  for (int k = 0; k < Dim - 1; ++k) {
    const double t = (x0[k] + grid.half_width()) / grid.spacing();
    ijk[k] = static_cast<int>(std::lround(t));
    if (std::abs(t - ijk[k]) > 1e-9 || ijk[k] <= 0 || ijk[k] >= grid.resolution() - 1) return false;
  }
  ijk[Dim - 1] = 0;
  return s.u.at(ijk) <= zero_tol;
}

/// True when some discrete contact node lies within `reach` of the thin
/// point x0. The discrete free boundary sits O(h) away from the continuum
/// one, so frequency estimates accept centers within that distance.
template <int Dim>
bool near_contact(const Solution<Dim>& s, const Point<Dim>& x0, double reach, double zero_tol = -1.0) {
  const auto& grid = s.grid();
  if (zero_tol < 0.0) zero_tol = contact_tolerance(s);
  if (std::abs(x0[Dim - 1]) > 1e-12) return false;
  const int span = static_cast<int>(std::ceil(reach / grid.spacing()));
  Index<Dim> lo{}, hi{};
  for (int k = 0; k < Dim - 1; ++k) {
    const int c = static_cast<int>(std::lround((x0[k] + grid.half_width()) / grid.spacing()));
    lo[k] = std::max(1, c - span);
    hi[k] = std::min(grid.resolution() - 2, c + span);
    if (lo[k] > hi[k]) return false;
  }
  Index<Dim> ijk = lo;
  ijk[Dim - 1] = 0;
  while (true) {
    const Point<Dim> x = grid.position(ijk);
    if (norm<Dim>(x - x0) <= reach * (1.0 + 1e-12) && s.u.at(ijk) <= zero_tol) return true;
    int k = Dim - 2;
    while (k >= 0 && ijk[k] == hi[k]) {
      ijk[k] = lo[k];
      --k;
    }
    if (k < 0) return false;
    ++ijk[k];
  }
}

/// phi(0+) at x0: least-squares line in r through the first dyadic triple
/// 8h 2^k, 2^{k+1}, 2^{k+2} whose phi values agree within plateau, evaluated
/// at r = 0. The window spans the extrapolation, phi at the triple's smallest
/// radius, and the line's worst misfit.
template <int Dim>
FrequencyEstimate estimate_frequency(const Solution<Dim>& s, const Point<Dim>& x0, double reach = -1.0,
                                     double zero_tol = -1.0, double plateau = 0.05) {
  const double h = s.grid().spacing();
  if (reach < 0.0) reach = 8.0 * h;
  if (!near_contact(s, x0, reach, zero_tol)) throw Error("estimate_frequency: x0 is not a contact point");
  // first dyadic triple from 8h on where phi has settled; the smallest radii
  // carry the lattice error of the faster-decaying profiles
  double r_max = 0.5 * s.grid().half_width();
  for (int i = 0; i < Dim; ++i) r_max = std::min(r_max, s.grid().half_width() - std::abs(x0[i]));
  std::vector<double> scan;
  for (double r = 8.0 * h; r <= r_max * (1.0 + 1e-12); r *= 2.0) scan.push_back(r);
  if (scan.size() < 3) {
    // coarse grid: the largest triple that fits, down to the 4h sphere floor
    if (r_max < 16.0 * h * (1.0 - 1e-12)) throw Error("estimate_frequency: grid too coarse for three radii at x0");
    scan = {0.25 * r_max, 0.5 * r_max, r_max};
  }
  const auto curve = frequency_curve<Dim>(s.u, x0, scan);
  std::vector<double> all;
  for (const auto& row : curve.rows) {
    if (!row.phi) throw Error("estimate_frequency: vanishing boundary mass at x0");
    all.push_back(*row.phi);
  }
  std::size_t best = 0;
  double best_spread = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 2 < all.size(); ++i) {
    const auto [lo, hi] = std::minmax({all[i], all[i + 1], all[i + 2]});
    if (hi - lo < best_spread) best_spread = hi - lo, best = i;
    if (hi - lo <= plateau) {
      best = i;
      break;
    }
  }
  FrequencyEstimate est;
  est.radii.assign(scan.begin() + best, scan.begin() + best + 3);
  est.phis.assign(all.begin() + best, all.begin() + best + 3);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < 3; ++i) {
    sx += est.radii[i];
    sy += est.phis[i];
    sxx += est.radii[i] * est.radii[i];
    sxy += est.radii[i] * est.phis[i];
  }
  const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
  est.value = (sy - slope * sx) / 3.0;
  est.phi_min = est.phis[0];
  double misfit = 0.0;
  for (int i = 0; i < 3; ++i) misfit = std::max(misfit, std::abs(est.phis[i] - (est.value + slope * est.radii[i])));
  const double spread = std::abs(est.phi_min - est.value) + misfit;
  est.lower = est.value - spread;
  est.upper = est.value + spread;
  return est;
}

}  // namespace thinobs
