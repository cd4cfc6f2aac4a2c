#pragma once

// Homogeneous two-dimensional solutions psi_lambda of the thin obstacle
// problem, their normalization and Laplacian constants, the 2D
// classification oracle, and the slit harmonics of the linearized problem.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "thinobs/error.hpp"
#include "thinobs/geometry.hpp"
#include "thinobs/quadrature.hpp"

namespace thinobs {

/// A homogeneity degree lambda stored exactly as 2*lambda.
class Homogeneity {
 public:
  constexpr Homogeneity() = default;

  static constexpr Homogeneity halves(int twice) { return Homogeneity(twice); }

  /// Rejects values that are not positive multiples of 1/2.
  static Homogeneity from_double(double lambda) {
    const double twice = 2.0 * lambda;
    const double rounded = std::round(twice);
    if (!(lambda > 0.0) || std::abs(twice - rounded) > 1e-9)
      throw Error("inadmissible homogeneity " + std::to_string(lambda) + ": must be a positive multiple of 1/2");
    return Homogeneity(static_cast<int>(rounded));
  }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_half_integer() const { return twice_ % 2 != 0; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  constexpr bool is_odd() const { return is_integer() && (twice_ / 2) % 2 == 1; }
  constexpr bool is_even() const { return is_integer() && (twice_ / 2) % 2 == 0; }
  /// lambda in 3/2 + 2N.
  constexpr bool is_three_halves_family() const { return is_half_integer() && twice_ % 4 == 3; }

  /// Homogeneities of 2D homogeneous solutions: {1,2,3,...} and {3/2, 7/2, ...}.
  constexpr bool is_solution_admissible() const {
    return twice_ > 0 && (is_integer() || is_three_halves_family());
  }

  /// Homogeneities for which psi_lambda is defined: 1/2 + N and 1, 2, 3, ...
  constexpr bool is_defined() const { return twice_ > 0; }

  constexpr Homogeneity minus_one() const { return Homogeneity(twice_ - 2); }

  friend constexpr bool operator==(Homogeneity a, Homogeneity b) { return a.twice_ == b.twice_; }
  friend constexpr auto operator<=>(Homogeneity a, Homogeneity b) { return a.twice_ <=> b.twice_; }

  std::string str() const {
    return is_integer() ? std::to_string(twice_ / 2) : std::to_string(twice_) + "/2";
  }

 private:
  constexpr explicit Homogeneity(int twice) : twice_(twice) {}
  int twice_ = 2;
};

namespace detail {

/// Unnormalized angular profile of psi_lambda at theta in [0, pi], where
/// theta = arg(x + i|y|).
inline double psi_angular(Homogeneity lambda, double theta) {
  const double lt = lambda.value() * theta;
  return lambda.is_odd() ? -std::sin(lt) : std::cos(lt);
}

/// Unnormalized psi_lambda: Re or -Im of (x + i|y|)^lambda in polar form,
/// which is the branch with sqrt(1) = 1 for the half-integer family.
inline double psi_shape(Homogeneity lambda, double x, double y) {
  const double r = std::hypot(x, y);
  if (r == 0.0) return 0.0;
  if (y == 0.0) {
    // Thin trace in closed form, free of the cos/sin round-off at theta = pi.
    if (lambda.is_odd()) return 0.0;
    if (lambda.is_half_integer()) return x > 0.0 ? std::pow(x, lambda.value()) : 0.0;
    return std::pow(std::abs(x), lambda.value());
  }
  const double theta = std::atan2(std::abs(y), x);
  return std::pow(r, lambda.value()) * psi_angular(lambda, theta);
}

inline double compute_normalization(int dimension, Homogeneity lambda) {
  // Angular part: int_0^{2 pi} g(|theta|)^2 with g^2 a trigonometric
  // polynomial of degree 2*lambda, so the uniform rule is exact.
  const int m = 4 * lambda.twice() + 64;
  double angular = 0.0;
  for (int k = 0; k < m; ++k) {
    const double th = 2.0 * std::numbers::pi * k / m;
    const double folded = th <= std::numbers::pi ? th : 2.0 * std::numbers::pi - th;
    const double g = psi_angular(lambda, folded);
    angular += g * g;
  }
  angular *= 2.0 * std::numbers::pi / m;
  double total = angular;
  if (dimension == 3) {
    // psi is constant along the third direction; on S^2 the trace is
    // (1 - t^2)^{lambda/2} g(phi) with surface element dt dphi.
    // Substituting t = sin s gives int cos(s)^{2 lambda + 1} ds.
    const double lam = lambda.value();
    const double axial = quadrature::integrate(
        [lam](double s) { return std::pow(std::cos(s), 2.0 * lam + 1.0); }, -0.5 * std::numbers::pi,
        0.5 * std::numbers::pi, 32, 24);
    total *= axial;
  }
  return 1.0 / std::sqrt(total);
}

struct ConstantTable {
  std::mutex mutex;
  std::map<std::pair<int, int>, double> values;
};

inline ConstantTable& normalization_table() {
  static ConstantTable table;
  return table;
}

}  // namespace detail

inline void require_defined(Homogeneity lambda) {
  if (!lambda.is_defined()) throw Error("psi is undefined for lambda = " + lambda.str());
}

/// a(n, lambda) > 0 with ||psi_lambda||_{L^2(dB_1)} = 1 in R^n.
inline double normalization_constant(int dimension, Homogeneity lambda) {
  if (dimension != 2 && dimension != 3) throw Error("dimension must be 2 or 3");
  require_defined(lambda);
  auto& table = detail::normalization_table();
  std::lock_guard lock(table.mutex);
  const auto key = std::make_pair(dimension, lambda.twice());
  if (auto it = table.values.find(key); it != table.values.end()) return it->second;
  const double a = detail::compute_normalization(dimension, lambda);
  table.values.emplace(key, a);
  return a;
}

/// Normalized psi_lambda(x, y) for the given ambient dimension; y is the
/// thin-normal coordinate and only |y| enters.
inline double psi(Homogeneity lambda, double x, double y, int dimension = 2) {
  require_defined(lambda);
  return normalization_constant(dimension, lambda) * detail::psi_shape(lambda, x, y);
}

/// c(n, lambda) >= 0 in Lap psi_lambda = -c (...) delta_0(y): the magnitude of
/// 2 d_y psi(-1, 0+) (x = +1 for the odd family), from a one-sided
/// Richardson-extrapolated difference of the closed form.
inline double laplacian_constant(int dimension, Homogeneity lambda) {
  require_defined(lambda);
  if (lambda.is_even()) return 0.0;
  const double x = lambda.is_half_integer() ? -1.0 : 1.0;
  auto one_sided = [&](double step) {
    // Second-order one-sided stencil.
    const double f0 = psi(lambda, x, 0.0, dimension);
    const double f1 = psi(lambda, x, step, dimension);
    const double f2 = psi(lambda, x, 2.0 * step, dimension);
    return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * step);
  };
  const double s = 1e-3;
  const double d = (4.0 * one_sided(s / 2.0) - one_sided(s)) / 3.0;
  return 2.0 * std::abs(d);
}

/// b(n, lambda) > 0 with d_x psi_lambda = b psi_{lambda-1} (lambda in 3/2 + N),
/// fitted by least squares of a central difference against psi_{lambda-1}.
inline double derivative_constant(int dimension, Homogeneity lambda) {
  if (!lambda.is_half_integer() || lambda.twice() < 3)
    throw Error("derivative relation needs lambda in 3/2 + N, got " + lambda.str());
  const Homogeneity lower = lambda.minus_one();
  double num = 0.0, den = 0.0;
  const double step = 1e-5;
  for (int k = 0; k < 64; ++k) {
    const double th = std::numbers::pi * (k + 0.5) / 64.0;
    const double x = 0.8 * std::cos(th), y = 0.8 * std::sin(th);
    const double dx = (psi(lambda, x + step, y, dimension) - psi(lambda, x - step, y, dimension)) / (2.0 * step);
    const double p = psi(lower, x, y, dimension);
    num += dx * p;
    den += p * p;
  }
  return num / den;
}

/// tau * psi_lambda composed with the rotation taking the spine e to
/// e_{n-1}: evaluated as tau * psi_lambda(x.e, x_n).
template <int Dim>
struct Profile {
  Homogeneity lambda = Homogeneity::halves(3);
  double tau = 1.0;
  Point<Dim> spine = default_spine();

  static constexpr Point<Dim> default_spine() {
    Point<Dim> e{};
    e[Dim - 2] = 1.0;
    return e;
  }

  void validate() const {
    require_defined(lambda);
    if (!(tau >= 0.0)) throw Error("profile amplitude must be nonnegative");
    if (spine[Dim - 1] != 0.0) throw Error("spine direction must lie in the thin space");
    if (std::abs(norm<Dim>(spine) - 1.0) > 1e-12) throw Error("spine direction must be a unit vector");
  }

  double operator()(const Point<Dim>& x) const {
    return tau * psi(lambda, dot<Dim>(x, spine), x[Dim - 1], Dim);
  }
};

/// Unit spine in the thin space at angle `angle` from e_1 (n = 3), or
/// +/- e_1 (n = 2, sign of cos(angle)).
template <int Dim>
Point<Dim> spine_from_angle(double angle) {
  Point<Dim> e{};
  if constexpr (Dim == 2) {
    e[0] = std::cos(angle) >= 0.0 ? 1.0 : -1.0;
  } else {
    e[0] = std::cos(angle);
    e[1] = std::sin(angle);
  }
  return e;
}

/// Signed surface density of Lap(tau psi_lambda o S) on the thin space at
/// x' (a thin-space point, x_n ignored): 2 tau d_y psi(x'.e, 0+).
template <int Dim>
double laplacian_density(Homogeneity lambda, double tau, const Point<Dim>& spine, const Point<Dim>& x) {
  require_defined(lambda);
  if (lambda.is_even()) return 0.0;
  const double c = laplacian_constant(Dim, lambda);
  const double s = dot<Dim>(x, spine);
  const double p = lambda.value() - 1.0;
  if (lambda.is_odd()) return -c * tau * std::pow(std::abs(s), p);
  const double neg = s < 0.0 ? std::pow(-s, p) : 0.0;
  // 3/2 + 2N pushes down, 1/2 + 2N pushes up.
  return lambda.is_three_halves_family() ? -c * tau * neg : c * tau * neg;
}

/// Admissible dictionary for classify_2d: {1, 3/2, 2, 3, 7/2, ...} up to cap.
inline std::vector<Homogeneity> admissible_dictionary(Homogeneity cap = Homogeneity::halves(15)) {
  std::vector<Homogeneity> out;
  for (int t = 1; t <= cap.twice(); ++t) {
    const auto h = Homogeneity::halves(t);
    if (h.is_solution_admissible()) out.push_back(h);
  }
  return out;
}

struct Classification {
  bool accepted = false;
  Homogeneity lambda;
  double tau = 0.0;
  double spine = 1.0;  // +1 for e_1, -1 for -e_1
  double residual = 0.0;
  double profile_norm = 0.0;
  std::string reason;
};

/// Least-squares match of a circle profile u(cos th, sin th), th_k = 2 pi k/m,
/// against tau * psi_lambda(+/- x, y) over the admissible dictionary with
/// tau >= 0. Accepts when the residual is at most 1e-6 of the profile norm.
inline Classification classify_2d(const std::vector<double>& profile,
                                   Homogeneity cap = Homogeneity::halves(15), double rel_tol = 1e-6) {
  const std::size_t m = profile.size();
  if (m == 0) throw Error("classify_2d: empty profile");
  if (m < 256) throw Error("classify_2d: profile needs at least 256 samples");
  for (double v : profile)
    if (!std::isfinite(v)) throw Error("classify_2d: profile contains non-finite values");

  const double w = 2.0 * std::numbers::pi / static_cast<double>(m);
  double pp = 0.0;
  for (double v : profile) pp += w * v * v;
  Classification best;
  best.profile_norm = std::sqrt(pp);
  if (pp == 0.0) {
    best.reason = "zero profile";
    return best;
  }
  best.residual = std::numeric_limits<double>::infinity();
  std::vector<double> templ(m);
  for (Homogeneity lam : admissible_dictionary(cap)) {
    for (double sign : {1.0, -1.0}) {
      double pt = 0.0, tt = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
        templ[k] = psi(lam, sign * std::cos(th), std::sin(th));
        pt += w * profile[k] * templ[k];
        tt += w * templ[k] * templ[k];
      }
      const double tau = std::max(0.0, pt / tt);
      double rr = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double d = profile[k] - tau * templ[k];
        rr += w * d * d;
      }
      const double res = std::sqrt(rr);
      if (res < best.residual - 1e-15) {
        best.residual = res;
        best.lambda = lam;
        best.tau = tau;
        best.spine = sign;
      }
    }
  }
  best.accepted = best.residual <= rel_tol * best.profile_norm;
  if (!best.accepted) best.reason = "no admissible homogeneous solution matches";
  return best;
}

/// Normalized member psi_{lambda, index} of the homogeneous slit harmonics.
/// In 2D each space is one-dimensional and spanned by psi_lambda; in 3D only
/// psi_lambda (index 0) and x_1 psi_{lambda-1} (index 1) are provided.
template <int Dim>
struct SlitBasisElement {
  Homogeneity lambda;
  int index = 1;
  double scale = 1.0;

  double operator()(const Point<Dim>& x) const {
    const double spine = x[Dim - 2], normal = x[Dim - 1];
    if constexpr (Dim == 2) {
      return psi(lambda, spine, normal, 2);
    } else {
      if (index == 0) return psi(lambda, spine, normal, 3);
      return scale * x[0] * detail::psi_shape(lambda.minus_one(), spine, normal);
    }
  }
};

inline SlitBasisElement<2> slit_basis_2d(Homogeneity lambda) {
  if (!lambda.is_half_integer()) throw Error("slit harmonics have homogeneity in 1/2 + N, got " + lambda.str());
  return SlitBasisElement<2>{lambda, 1, 1.0};
}

/// The 3D members psi_lambda and x_1 psi_{lambda-1}, each unit in L^2(dB_1).
inline std::vector<SlitBasisElement<3>> slit_members_3d(Homogeneity lambda) {
  if (!lambda.is_half_integer()) throw Error("slit harmonics have homogeneity in 1/2 + N, got " + lambda.str());
  std::vector<SlitBasisElement<3>> out{SlitBasisElement<3>{lambda, 0, 1.0}};
  if (lambda.twice() >= 3) {
    SlitBasisElement<3> e{lambda, 1, 1.0};
    const auto rule = sphere_rule<3>(256);
    double nn = 0.0;
    for (const auto& [d, w] : rule) nn += w * e(d) * e(d);
    e.scale = 1.0 / std::sqrt(nn);
    out.push_back(e);
  }
  return out;
}

struct SlitCoefficient {
  Homogeneity lambda;
  int index = 1;
  double value = 0.0;
};

/// Coefficients c_{lambda,1} = int_{dB_1} w psi_lambda of a (rescaled) sample
/// against the 2D slit basis for lambda = 1/2, 3/2, ..., up_to.
template <int Dim>
std::vector<SlitCoefficient> project_slit(const SphericalSample<Dim>& sample, Homogeneity up_to) {
  if constexpr (Dim != 2) {
    throw Error("the complete slit basis is only available for n = 2");
  } else {
    std::vector<SlitCoefficient> out;
    for (int t = 1; t <= up_to.twice(); t += 2) {
      const auto basis = slit_basis_2d(Homogeneity::halves(t));
      double c = 0.0;
      for (const auto& node : sample.nodes) c += node.weight * node.value * basis(node.direction);
      out.push_back({basis.lambda, 1, c});
    }
    return out;
  }
}

}  // namespace thinobs
