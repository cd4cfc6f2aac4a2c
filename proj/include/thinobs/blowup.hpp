#pragma once

// Contact set and free boundary, the A_lambda profile fit, the flatness
// predicate, dyadic decay scans and the finite sequence lemma.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "thinobs/error.hpp"
#include "thinobs/frequency.hpp"
#include "thinobs/geometry.hpp"
#include "thinobs/profiles.hpp"
#include "thinobs/report.hpp"
#include "thinobs/solver.hpp"

namespace thinobs {

template <int Dim>
struct ContactSet {
  std::vector<std::size_t> nodes;          // thin nodes with u <= zero_tol
  std::vector<std::size_t> free_boundary;  // contact nodes next to non-contact thin nodes
  double zero_tol = 0.0;

  bool empty() const { return nodes.empty(); }
};

template <int Dim>
ContactSet<Dim> contact_set(const Solution<Dim>& s, double zero_tol = -1.0) {
  const auto& grid = s.grid();
  ContactSet<Dim> cs;
  cs.zero_tol = zero_tol < 0.0 ? contact_tolerance(s) : zero_tol;
  std::vector<char> in(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.kind(i) == NodeKind::thin && s.u[i] <= cs.zero_tol) {
      in[i] = 1;
      cs.nodes.push_back(i);
    }
  for (std::size_t i : cs.nodes) {
    bool edge = false;
    for (int k = 0; k < Dim - 1 && !edge; ++k) {
      const std::size_t st = grid.stride(k);
      for (std::size_t j : {i - st, i + st})
        if (grid.kind(j) == NodeKind::thin && !in[j]) edge = true;
    }
    if (edge) cs.free_boundary.push_back(i);
  }
  return cs;
}

template <int Dim>
struct ProfileFit {
  double r = 0.0;
  Homogeneity lambda;
  double tau = 0.0;
  Point<Dim> spine{};
  double spine_angle = 0.0;  // n = 3: angle from e_1; n = 2: 0 or pi
  double A = 0.0;
  double norm = 0.0;        // ||u(x0 + r .)||_{L^2(dB_1)}
  double normalized = 0.0;  // A / norm

  Record record() const {
    Record rec;
    rec.add("r", r).add("lambda", lambda.str()).add("tau", tau).add("spine_angle", spine_angle);
    rec.add("A", A).add("norm", norm).add("A_normalized", normalized);
    return rec;
  }
};

namespace detail {

struct SpineTrial {
  double tau = 0.0;
  double A = 0.0;
};

// Closed-form tau >= 0 for one spine, and the residual norm.
template <int Dim>
SpineTrial fit_spine(const SphericalSample<Dim>& sample, Homogeneity lambda, const Point<Dim>& e) {
  const double r = sample.radius;
  double vt = 0.0, tt = 0.0;
  std::vector<double> t(sample.nodes.size());
  for (std::size_t k = 0; k < sample.nodes.size(); ++k) {
    const auto& nd = sample.nodes[k];
    t[k] = psi(lambda, r * dot<Dim>(nd.direction, e), r * nd.direction[Dim - 1], Dim);
    vt += nd.weight * nd.value * t[k];
    tt += nd.weight * t[k] * t[k];
  }
  SpineTrial out;
  out.tau = tt > 0.0 ? std::max(0.0, vt / tt) : 0.0;
  double rr = 0.0;
  for (std::size_t k = 0; k < sample.nodes.size(); ++k) {
    const double d = sample.nodes[k].value - out.tau * t[k];
    rr += sample.nodes[k].weight * d * d;
  }
  out.A = std::sqrt(rr);
  return out;
}

}  // namespace detail

/// A_lambda(r) at x0: min over tau >= 0 and the spine e of
/// ||u(x0 + r .) - tau psi_lambda(r (. e), r .n)||_{L^2(dB_1)}. n = 2 tries
/// +/- e_1; n = 3 scans 360 spine angles and refines parabolically.
template <int Dim, class F>
  requires ScalarField<F, Dim>
ProfileFit<Dim> fit_profile(const F& f, const Point<Dim>& x0, double r, Homogeneity lambda,
                            int m = default_angular_nodes<Dim>()) {
  if (!lambda.is_solution_admissible()) throw Error("fit_profile: inadmissible homogeneity " + lambda.str());
  if constexpr (is_grid_function<std::remove_cvref_t<F>>::value) {
    if (r < 8.0 * f.grid().spacing() * (1.0 - 1e-12)) throw Error("fit_profile: radius below the 8h floor");
  }
  const auto sample = sample_sphere<Dim>(f, x0, r, m);
  ProfileFit<Dim> fit;
  fit.r = r;
  fit.lambda = lambda;
  fit.norm = std::sqrt(sample.integral_sq());
  if (!(fit.norm > 0.0)) throw Error("fit_profile: the field vanishes on the sphere");

  auto trial = [&](double angle) { return detail::fit_spine<Dim>(sample, lambda, spine_from_angle<Dim>(angle)); };
  double best_angle = 0.0;
  detail::SpineTrial best{0.0, std::numeric_limits<double>::infinity()};
  if constexpr (Dim == 2) {
    for (double angle : {0.0, std::numbers::pi}) {
      const auto t = trial(angle);
      if (t.A < best.A) best = t, best_angle = angle;
    }
  } else {
    const int count = 360;
    const double step0 = 2.0 * std::numbers::pi / count;
    std::vector<double> A(count);
    int arg = 0;
    for (int k = 0; k < count; ++k) {
      const auto t = trial(k * step0);
      A[k] = t.A;
      if (t.A < best.A) best = t, best_angle = k * step0, arg = k;
    }
    // Parabolic refinement of A^2 in the angle, narrowing each round.
    double step = step0;
    double centre = best_angle;
    double fl = A[(arg + count - 1) % count], fr = A[(arg + 1) % count];
    for (int round = 0; round < 4; ++round) {
      const double a = fl * fl, b = best.A * best.A, c = fr * fr;
      const double denom = a - 2.0 * b + c;
      if (!(denom > 0.0)) break;
      const double shift = std::clamp(0.5 * step * (a - c) / denom, -step, step);
      const auto t = trial(centre + shift);
      if (t.A < best.A) best = t, best_angle = centre + shift;
      step *= 0.25;
      centre = best_angle;
      fl = trial(centre - step).A;
      fr = trial(centre + step).A;
    }
    best_angle = std::remainder(best_angle, 2.0 * std::numbers::pi);
  }
  fit.tau = best.tau;
  fit.A = best.A;
  fit.spine_angle = best_angle;
  fit.spine = spine_from_angle<Dim>(best_angle);
  fit.normalized = fit.A / fit.norm;
  return fit;
}

template <int Dim>
ProfileFit<Dim> fit_profile(const Solution<Dim>& s, const Point<Dim>& x0, double r, Homogeneity lambda,
                            int m = default_angular_nodes<Dim>()) {
  return fit_profile<Dim>(s.u, x0, r, lambda, m);
}

/// Same minimization as fit_profile with the profile replaced by a reference
/// field centred at the origin. n = 2 also tries the mirror x_1 -> -x_1; in
/// n = 3 the reference spine is kept as is.
template <int Dim, class F, class G>
  requires ScalarField<F, Dim> && ScalarField<G, Dim>
ProfileFit<Dim> fit_reference(const F& f, const G& reference, const Point<Dim>& x0, double r, Homogeneity lambda,
                              int m = default_angular_nodes<Dim>()) {
  if constexpr (is_grid_function<std::remove_cvref_t<F>>::value) {
    if (r < 8.0 * f.grid().spacing() * (1.0 - 1e-12)) throw Error("fit_reference: radius below the 8h floor");
  }
  const auto sample = sample_sphere<Dim>(f, x0, r, m);
  const auto ref = sample_sphere<Dim>(reference, Point<Dim>{}, r, m);
  ProfileFit<Dim> fit;
  fit.r = r;
  fit.lambda = lambda;
  fit.norm = std::sqrt(sample.integral_sq());
  if (!(fit.norm > 0.0)) throw Error("fit_reference: the field vanishes on the sphere");
  fit.A = std::numeric_limits<double>::infinity();
  const int mirrors = Dim == 2 ? 2 : 1;
  const std::size_t count = sample.nodes.size();
  for (int mirror = 0; mirror < mirrors; ++mirror) {
    std::vector<double> t(count);
    double vt = 0.0, tt = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      if (mirror == 0) {
        t[k] = ref.nodes[k].value;
      } else {
        Point<Dim> x = r * sample.nodes[k].direction;
        x[0] = -x[0];
        t[k] = reference(x);
      }
      vt += sample.nodes[k].weight * sample.nodes[k].value * t[k];
      tt += sample.nodes[k].weight * t[k] * t[k];
    }
    const double tau = tt > 0.0 ? std::max(0.0, vt / tt) : 0.0;
    double rr = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const double d = sample.nodes[k].value - tau * t[k];
      rr += sample.nodes[k].weight * d * d;
    }
    if (std::sqrt(rr) < fit.A) {
      fit.A = std::sqrt(rr);
      fit.tau = tau;
      fit.spine_angle = mirror == 0 ? 0.0 : std::numbers::pi;
    }
  }
  fit.spine = spine_from_angle<Dim>(fit.spine_angle);
  if constexpr (Dim == 3) fit.spine = Profile<3>::default_spine();
  fit.normalized = fit.A / fit.norm;
  return fit;
}

/// P_eps^lambda(r) at x0 for a finite point set: every point of B_{r/2}(x0)
/// lies within eps r of an (n-3)-dimensional space through x0. For n = 3 that
/// space is {x0}; for n = 2 it is empty, so only x0 itself is allowed.
template <int Dim>
bool flatness(const std::vector<Point<Dim>>& points, const Point<Dim>& x0, double r, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw Error("flatness: eps must lie in (0, 1/2)");
  const double tiny = 1e-12 * std::max(1.0, r);
  for (const auto& p : points) {
    const double d = norm<Dim>(p - x0);
    if (d > 0.5 * r) continue;
    if constexpr (Dim == 2) {
      if (d > tiny) return false;
    } else {
      if (d > eps * r) return false;
    }
  }
  return true;
}

/// Free-boundary nodes within `radius` of x0 whose frequency estimate lies
/// within `window` of lambda. Nodes too close to the domain edge for the
/// estimate are skipped.
template <int Dim>
std::vector<Point<Dim>> frequency_points(const Solution<Dim>& s, const ContactSet<Dim>& cs, Homogeneity lambda,
                                         const Point<Dim>& x0, double radius, double window = 0.1) {
  std::vector<Point<Dim>> out;
  const auto& grid = s.grid();
  const double h = grid.spacing();
  for (std::size_t i : cs.free_boundary) {
    const Point<Dim> x = grid.position(i);
    if (norm<Dim>(x - x0) > radius) continue;
    if (!grid.contains_ball(x, 32.0 * h)) continue;
    const auto est = estimate_frequency<Dim>(s, x, 0.0, cs.zero_tol);
    if (std::abs(est.value - lambda.value()) <= window) out.push_back(x);
  }
  return out;
}

enum class ScaleStatus { ok, degenerate, below_floor };

inline std::string to_string(ScaleStatus s) {
  switch (s) {
    case ScaleStatus::ok: return "ok";
    case ScaleStatus::degenerate: return "A~0";
    case ScaleStatus::below_floor: return "below-floor";
  }
  return "ok";
}

struct DecayParams {
  double eps = 0.1;     // flatness
  double gamma = 0.45;  // weak alternative: exponent >= lambda - gamma
  double sigma = 0.5;   // strong alternative: exponent >= lambda + sigma
  double degenerate_below = 1e-10;  // A / ||u_r|| treated as zero
};

struct DecayScale {
  int k = 0;
  double r = 0.0;
  double A = 0.0;
  double normalized = 0.0;
  double tau = 0.0;
  ScaleStatus status = ScaleStatus::ok;
  std::optional<bool> flat;
  // Between this scale and the next:
  std::optional<double> exponent;  // log2(A_k / A_{k+1})
  std::optional<bool> good;        // exponent >= lambda + sigma
  std::optional<bool> weak;        // exponent >= lambda - gamma
};

template <int Dim>
struct DecayScan {
  Point<Dim> center{};
  Homogeneity lambda;
  DecayParams params;
  std::vector<DecayScale> scales;
  double density = 0.0;            // fraction of good scales among measured exponents
  double prefix_min = 0.0;         // running minimum of prefix averages of the good flags
  std::vector<int> good_sequence;  // 0/1 per measured exponent

  /// log2(A_k / A_{k+1}) - lambda per measured exponent: the decay rate of
  /// A relative to the profile itself.
  std::vector<double> excess_exponents() const {
    std::vector<double> v;
    for (const auto& sc : scales)
      if (sc.exponent) v.push_back(*sc.exponent - lambda.value());
    return v;
  }

  CsvTable csv() const {
    CsvTable t({"k", "r", "A", "A_normalized", "exponent", "excess", "flat_flag", "good_flag", "status"});
    auto flag = [](const std::optional<bool>& b) { return b ? std::string(*b ? "1" : "0") : std::string(""); };
    for (const auto& sc : scales)
      t.add_row({std::to_string(sc.k), format_number(sc.r), format_number(sc.A), format_number(sc.normalized),
                 sc.exponent ? format_number(*sc.exponent) : std::string(""),
                 sc.exponent ? format_number(*sc.exponent - lambda.value()) : std::string(""), flag(sc.flat),
                 flag(sc.good), to_string(sc.status)});
    return t;
  }

  Record summary() const {
    Record r;
    r.add("lambda", lambda.str()).add("eps", params.eps).add("gamma", params.gamma).add("sigma", params.sigma);
    r.add("scales", scales.size()).add("exponents", good_sequence.size());
    r.add("good_density", density).add("prefix_average_min", prefix_min);
    return r;
  }
};

namespace detail {

template <int Dim, class FitFn, class FlatFn>
DecayScan<Dim> decay_scan_impl(FitFn&& fit_at, const Point<Dim>& x0, Homogeneity lambda, double r0, int k_max,
                               const DecayParams& params, double floor, FlatFn&& flat_at) {
  DecayScan<Dim> scan;
  scan.center = x0;
  scan.lambda = lambda;
  scan.params = params;
  for (int k = 0; k <= k_max; ++k) {
    DecayScale sc;
    sc.k = k;
    sc.r = r0 * std::ldexp(1.0, -k);
    if (sc.r < floor * (1.0 - 1e-12)) {
      sc.status = ScaleStatus::below_floor;
      scan.scales.push_back(sc);
      continue;
    }
    const ProfileFit<Dim> fit = fit_at(sc.r);
    sc.A = fit.A;
    sc.normalized = fit.normalized;
    sc.tau = fit.tau;
    if (fit.normalized <= params.degenerate_below) sc.status = ScaleStatus::degenerate;
    sc.flat = flat_at(sc.r);
    scan.scales.push_back(sc);
  }
  int usable = 0;
  for (const auto& sc : scan.scales) usable += sc.status != ScaleStatus::below_floor;
  if (usable < 2) throw Error("decay_scan: fewer than 2 usable scales");
  for (std::size_t k = 0; k + 1 < scan.scales.size(); ++k) {
    auto& a = scan.scales[k];
    const auto& b = scan.scales[k + 1];
    if (a.status != ScaleStatus::ok || b.status != ScaleStatus::ok) continue;
    a.exponent = std::log2(a.A / b.A);
    a.good = *a.exponent >= lambda.value() + params.sigma;
    a.weak = *a.exponent >= lambda.value() - params.gamma;
    scan.good_sequence.push_back(*a.good ? 1 : 0);
  }
  if (!scan.good_sequence.empty()) {
    double sum = 0.0;
    scan.prefix_min = 1.0;
    for (std::size_t i = 0; i < scan.good_sequence.size(); ++i) {
      sum += scan.good_sequence[i];
      scan.prefix_min = std::min(scan.prefix_min, sum / static_cast<double>(i + 1));
    }
    scan.density = sum / static_cast<double>(scan.good_sequence.size());
  }
  return scan;
}

}  // namespace detail

/// Decay scan of an arbitrary field (no flatness information).
template <int Dim, class F>
  requires ScalarField<F, Dim>
DecayScan<Dim> decay_scan(const F& f, const Point<Dim>& x0, Homogeneity lambda, double r0, int k_max,
                          const DecayParams& params = {}, double floor = 0.0) {
  if constexpr (is_grid_function<std::remove_cvref_t<F>>::value) floor = std::max(floor, 8.0 * f.grid().spacing());
  return detail::decay_scan_impl<Dim>([&](double r) { return fit_profile<Dim>(f, x0, r, lambda); }, x0, lambda, r0,
                                      k_max, params, floor, [](double) { return std::optional<bool>{}; });
}

/// Decay scan of a solve: checks that the frequency at x0 is within 0.15 of
/// lambda and records the flatness flag of the frequency-lambda points.
template <int Dim>
DecayScan<Dim> decay_scan(const Solution<Dim>& s, const Point<Dim>& x0, Homogeneity lambda, double r0, int k_max,
                          const DecayParams& params = {}) {
  const auto est = estimate_frequency<Dim>(s, x0);
  if (std::abs(est.value - lambda.value()) > 0.15)
    throw Error("decay_scan: frequency estimate " + format_number(est.value) + " is not within 0.15 of " +
                lambda.str());
  const auto cs = contact_set(s);
  const auto pts = frequency_points<Dim>(s, cs, lambda, x0, 0.5 * r0);
  return detail::decay_scan_impl<Dim>([&](double r) { return fit_profile<Dim>(s.u, x0, r, lambda); }, x0, lambda, r0,
                                      k_max, params, 8.0 * s.grid().spacing(),
                                      [&](double r) { return std::optional<bool>{flatness<Dim>(pts, x0, r, params.eps)}; });
}

/// Decay scan against a lattice reference (typically the discrete solve of
/// pure profile data on the same grid) instead of the analytic profile.
template <int Dim, class F, class G>
  requires ScalarField<F, Dim> && ScalarField<G, Dim>
DecayScan<Dim> decay_scan_reference(const F& f, const G& reference, const Point<Dim>& x0, Homogeneity lambda,
                                    double r0, int k_max, const DecayParams& params = {}, double floor = 0.0) {
  if constexpr (is_grid_function<std::remove_cvref_t<F>>::value) floor = std::max(floor, 8.0 * f.grid().spacing());
  return detail::decay_scan_impl<Dim>([&](double r) { return fit_reference<Dim>(f, reference, x0, r, lambda); }, x0,
                                      lambda, r0, k_max, params, floor, [](double) { return std::optional<bool>{}; });
}

/// Smallest n >= m such that every window a_n..a_{n+j} inside the sequence
/// averages at least p. With T_k = S_k - p k (S the prefix sums) the
/// condition reads T_k >= T_n for every k in (n, len].
inline std::optional<std::size_t> sequence_witness(const std::vector<int>& a, double p, std::size_t m) {
  if (!(p > 0.0 && p < 1.0)) throw Error("sequence_witness: p must lie in (0, 1)");
  const std::size_t len = a.size();
  if (m >= len) return std::nullopt;
  std::vector<double> T(len + 1, 0.0);
  double S = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    S += a[k];
    T[k + 1] = S - p * static_cast<double>(k + 1);
  }
  // suffix[k] = min_{j >= k} T_j
  std::vector<double> suffix(len + 2, std::numeric_limits<double>::infinity());
  for (std::size_t k = len + 1; k-- > 0;) suffix[k] = std::min(T[k], suffix[k + 1]);
  for (std::size_t n = m; n < len; ++n)
    if (suffix[n + 1] >= T[n] - 1e-12) return n;
  return std::nullopt;
}

}  // namespace thinobs
