#pragma once

// Discrete thin obstacle problem: minimize the Dirichlet energy of the
// evenly reflected lattice function subject to u >= 0 on thin nodes and
// Dirichlet data on the outer boundary, by projected SOR.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thinobs/error.hpp"
#include "thinobs/geometry.hpp"
#include "thinobs/profiles.hpp"

namespace thinobs {

enum class DataKind { profile, perturbed_profile, harmonic_min, custom };

inline std::string to_string(DataKind k) {
  switch (k) {
    case DataKind::profile: return "profile";
    case DataKind::perturbed_profile: return "perturbed-profile";
    case DataKind::harmonic_min: return "harmonic-min";
    case DataKind::custom: return "custom";
  }
  return "custom";
}

inline DataKind data_kind_from_string(const std::string& s) {
  if (s == "profile") return DataKind::profile;
  if (s == "perturbed-profile" || s == "perturbed") return DataKind::perturbed_profile;
  if (s == "harmonic-min") return DataKind::harmonic_min;
  if (s == "custom") return DataKind::custom;
  throw Error("unknown boundary data kind '" + s + "'");
}

/// Parameters of the built-in boundary data families.
struct DataParams {
  Homogeneity lambda = Homogeneity::halves(3);
  double tau = 1.0;
  double spine_angle = std::numbers::pi / 2.0;  // n = 3: angle of the spine from e_1 (default e_2)
  Homogeneity lambda2 = Homogeneity::halves(7);
  double epsilon = 0.0;
  double half_width = 2.0;  // extent over which trace nonnegativity is checked
};

template <int Dim>
struct BoundaryData {
  std::function<double(const Point<Dim>&)> value;
  DataKind kind = DataKind::custom;
  DataParams params;

  double operator()(const Point<Dim>& x) const { return value(x); }
};

/// Default spine for n = 3 data is e_{n-1} = e_2, i.e. angle pi/2.
template <int Dim>
Point<Dim> data_spine(const DataParams& p) {
  return spine_from_angle<Dim>(p.spine_angle);
}

/// Builds boundary data of the requested family. Profile: tau psi_lambda(x.e,
/// x_n). Perturbed: tau (psi_lambda + eps psi_lambda2), both in 3/2 + 2N so
/// the sum is an exact solution. Harmonic-min: tau (sum_{i<n} x_i^2 - (n-1)
/// x_n^2), harmonic with thin trace minimized (= 0) at the origin.
template <int Dim>
BoundaryData<Dim> make_boundary_data(DataKind kind, const DataParams& params) {
  BoundaryData<Dim> data;
  data.kind = kind;
  data.params = params;
  if (!(params.tau >= 0.0)) throw Error("amplitude tau must be nonnegative");
  switch (kind) {
    case DataKind::profile: {
      Profile<Dim> q{params.lambda, params.tau, data_spine<Dim>(params)};
      q.validate();
      if (!params.lambda.is_solution_admissible())
        throw Error("profile data needs an admissible homogeneity, got " + params.lambda.str());
      data.value = q;
      break;
    }
    case DataKind::perturbed_profile: {
      if (!params.lambda.is_three_halves_family() || !params.lambda2.is_three_halves_family())
        throw Error("perturbed-profile data needs lambda, lambda' in 3/2 + 2N");
      if (!(params.lambda2 > params.lambda)) throw Error("perturbed-profile data needs lambda' > lambda");
      Profile<Dim> q{params.lambda, params.tau, data_spine<Dim>(params)};
      Profile<Dim> q2{params.lambda2, params.tau, data_spine<Dim>(params)};
      q.validate();
      const double eps = params.epsilon;
      // Thin trace tau a (s_+^lambda + eps a'/a s_+^lambda2) on |s| <= sqrt(n-1) R.
      const double reach = std::sqrt(Dim - 1.0) * params.half_width;
      for (int k = 0; k <= 4096; ++k) {
        const double s = reach * k / 4096.0;
        const double trace = psi(params.lambda, s, 0.0, Dim) + eps * psi(params.lambda2, s, 0.0, Dim);
        if (trace < -1e-14) throw Error("perturbation makes the thin trace negative at s = " + std::to_string(s));
      }
      data.value = [q, q2, eps](const Point<Dim>& x) { return q(x) + eps * q2(x); };
      break;
    }
    case DataKind::harmonic_min: {
      const double tau = params.tau;
      data.value = [tau](const Point<Dim>& x) {
        double v = 0.0;
        for (int k = 0; k < Dim - 1; ++k) v += x[k] * x[k];
        return tau * (v - (Dim - 1) * x[Dim - 1] * x[Dim - 1]);
      };
      break;
    }
    case DataKind::custom:
      throw Error("custom boundary data must be constructed with custom_boundary_data");
  }
  return data;
}

template <int Dim>
BoundaryData<Dim> custom_boundary_data(std::function<double(const Point<Dim>&)> f) {
  BoundaryData<Dim> data;
  data.kind = DataKind::custom;
  data.value = std::move(f);
  return data;
}

/// Thin-node treatment: the Signorini constraint, or the linearized slit
/// problem (u pinned to 0 on thin nodes with x.e <= 0, free elsewhere).
enum class ThinCondition { obstacle, slit };

enum class InitialGuess { harmonic_clipped, zero, boundary_extension };

struct SolverOptions {
  double omega = 0.0;  // 0 selects the optimal SOR factor for the lattice
  double tol = 0.0;    // 0 selects 1e-10 (n = 2) or 1e-8 (n = 3)
  int max_iter = 200000;
  InitialGuess initial = InitialGuess::harmonic_clipped;
  ThinCondition thin = ThinCondition::obstacle;
  double slit_angle = std::numbers::pi / 2.0;  // spine of the slit problem (n = 3)
  bool check_energy = true;
};

template <int Dim>
double default_tolerance() {
  return Dim == 2 ? 1e-10 : 1e-8;
}

/// Optimal SOR factor for the 2^-1 (resolution - 1)-interval reflected cube.
template <int Dim>
double optimal_omega(const Grid<Dim>& grid) {
  return 2.0 / (1.0 + std::sin(std::numbers::pi / (grid.resolution() - 1)));
}

template <int Dim>
struct Solution {
  GridFunction<Dim> u;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  double omega = 0.0;
  double tol = 0.0;
  ThinCondition thin = ThinCondition::obstacle;
  DataKind provenance = DataKind::custom;
  /// Largest relative energy increase seen between consecutive sweeps.
  double max_energy_increase = 0.0;
  int energy_checks = 0;
  /// Sweeps run at omega = 1 after over-relaxation stalled at round-off.
  int polish_sweeps = 0;

  const Grid<Dim>& grid() const { return u.grid(); }
};

namespace detail {

enum class Role : std::uint8_t { fixed, interior, thin_obstacle, thin_free };

template <int Dim>
std::vector<Role> node_roles(const Grid<Dim>& grid, ThinCondition thin, const Point<Dim>& spine) {
  std::vector<Role> roles(grid.size(), Role::fixed);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto ijk = grid.multi_index(i);
    switch (grid.kind(ijk)) {
      case NodeKind::outer: roles[i] = Role::fixed; break;
      case NodeKind::interior: roles[i] = Role::interior; break;
      case NodeKind::thin:
        if (thin == ThinCondition::obstacle) {
          roles[i] = Role::thin_obstacle;
        } else {
          roles[i] = dot<Dim>(grid.position(ijk), spine) <= 1e-12 ? Role::fixed : Role::thin_free;
        }
        break;
    }
  }
  return roles;
}

/// Sum of the 2n lattice neighbours, with the ghost value at x_n = -h equal
/// to the value at x_n = +h on thin nodes.
template <int Dim>
inline double neighbour_sum(const std::vector<double>& u, const Grid<Dim>& grid, std::size_t i, bool thin) {
  double s = thin ? 2.0 * u[i + 1] : u[i + 1] + u[i - 1];
  for (int k = 0; k < Dim - 1; ++k) {
    const std::size_t st = grid.stride(k);
    s += u[i + st] + u[i - st];
  }
  return s;
}

/// Half-domain Dirichlet energy: edges above the thin plane count once,
/// edges inside it count one half (they are shared with the mirror image).
template <int Dim>
double half_energy(const std::vector<double>& u, const Grid<Dim>& grid) {
  const std::size_t n = grid.size();
  const std::size_t M = grid.normal_nodes();
  const std::size_t N = grid.resolution();
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i % M;
    const double w = j == 0 ? 0.5 : 1.0;
    if (j + 1 < M) {
      const double d = u[i + 1] - u[i];
      e += d * d;
    }
    if (i + grid.stride(0) < n) {
      const double d = u[i + grid.stride(0)] - u[i];
      e += w * d * d;
    }
    if constexpr (Dim == 3) {
      if ((i / M) % N + 1 < N) {
        const double d = u[i + M] - u[i];
        e += w * d * d;
      }
    }
  }
  return 0.5 * e * std::pow(grid.spacing(), Dim - 2);
}

}  // namespace detail

/// Discrete Laplacian at node i with the reflected stencil on thin nodes.
/// Only meaningful for non-outer nodes.
template <int Dim>
double discrete_laplacian(const GridFunction<Dim>& f, std::size_t i) {
  const auto& grid = f.grid();
  const bool thin = grid.multi_index(i)[Dim - 1] == 0;
  const double h = grid.spacing();
  return (detail::neighbour_sum<Dim>(f.values(), grid, i, thin) - 2.0 * Dim * f[i]) / (h * h);
}

/// Lap_h f at every node (0 on outer-boundary nodes).
template <int Dim>
GridFunction<Dim> discrete_laplacian(const GridFunction<Dim>& f) {
  GridFunction<Dim> out(f.grid());
  for (std::size_t i = 0; i < f.grid().size(); ++i)
    if (f.grid().kind(i) != NodeKind::outer) out[i] = discrete_laplacian<Dim>(f, i);
  return out;
}

namespace detail {

// One Gauss-Seidel/SOR sweep in lexicographic order; returns max |update|.
template <int Dim>
double sweep(std::vector<double>& u, const Grid<Dim>& grid, const std::vector<Role>& roles, double omega,
             bool project) {
  const double inv = 1.0 / (2.0 * Dim);
  double max_update = 0.0;
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Role role = roles[i];
    if (role == Role::fixed) continue;
    const bool thin = role != Role::interior;
    const double target = neighbour_sum<Dim>(u, grid, i, thin) * inv;
    double next = u[i] + omega * (target - u[i]);
    if (project && role == Role::thin_obstacle && next < 0.0) next = 0.0;
    const double d = std::abs(next - u[i]);
    if (d > max_update) max_update = d;
    u[i] = next;
  }
  return max_update;
}

}  // namespace detail

/// Projected SOR for the discrete thin obstacle (or slit) problem. The
/// convergence metric is the max node update of a sweep divided by h^2, so
/// `tol` is measured in units of the discrete Laplacian. A run that hits
/// max_iter is returned with converged = false.
template <int Dim>
Solution<Dim> solve(const Grid<Dim>& grid, const BoundaryData<Dim>& data, SolverOptions opt = {},
                    const GridFunction<Dim>* initial = nullptr) {
  if (opt.tol == 0.0) opt.tol = default_tolerance<Dim>();
  if (!(opt.tol > 0.0)) throw Error("solver tolerance must be positive");
  if (opt.omega == 0.0) opt.omega = optimal_omega<Dim>(grid);
  if (!(opt.omega > 0.0 && opt.omega < 2.0)) throw Error("relaxation factor must lie in (0, 2)");
  if (opt.max_iter < 1) throw Error("max_iter must be positive");

  const Point<Dim> slit_spine = spine_from_angle<Dim>(opt.slit_angle);
  const auto roles = detail::node_roles<Dim>(grid, opt.thin, slit_spine);
  const double h2 = grid.spacing() * grid.spacing();

  Solution<Dim> sol{GridFunction<Dim>(grid)};
  sol.omega = opt.omega;
  sol.tol = opt.tol;
  sol.thin = opt.thin;
  sol.provenance = data.kind;
  auto& u = sol.u.values();

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto ijk = grid.multi_index(i);
    if (grid.kind(ijk) == NodeKind::outer) {
      u[i] = data(grid.position(ijk));
      if (!std::isfinite(u[i])) throw Error("boundary data is not finite");
    } else if (roles[i] == detail::Role::fixed) {
      u[i] = 0.0;  // pinned slit node
    }
  }

  if (initial != nullptr) {
    if (!(initial->grid() == grid)) throw Error("initial guess lives on a different grid");
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (roles[i] != detail::Role::fixed) u[i] = (*initial)[i];
  } else if (opt.initial == InitialGuess::harmonic_clipped) {
    // Unconstrained harmonic solve to a loose tolerance, then clip.
    const double loose = std::max(opt.tol * 1e4, 1e-6);
    for (int it = 0; it < opt.max_iter; ++it)
      if (detail::sweep<Dim>(u, grid, roles, opt.omega, false) / h2 <= loose) break;
  } else if (opt.initial == InitialGuess::boundary_extension) {
    // Each interior column takes the value of its top boundary node.
    const int top = grid.normal_nodes() - 1;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (roles[i] == detail::Role::fixed) continue;
      auto ijk = grid.multi_index(i);
      ijk[Dim - 1] = top;
      u[i] = u[grid.index(ijk)];
    }
  }
  if (opt.thin == ThinCondition::obstacle)
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (roles[i] == detail::Role::thin_obstacle && u[i] < 0.0) u[i] = 0.0;

  // Over-relaxation amplifies round-off near omega = 2, which can pin the
  // update metric above tol on fine grids; once it stalls, finish with
  // plain Gauss-Seidel sweeps.
  double energy = opt.check_energy ? detail::half_energy<Dim>(u, grid) : 0.0;
  const bool project = opt.thin == ThinCondition::obstacle;
  const int window = 100;
  double omega = opt.omega;
  double best = std::numeric_limits<double>::infinity();
  double window_start_best = best;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const double metric = detail::sweep<Dim>(u, grid, roles, omega, project) / h2;
    sol.iterations = it;
    sol.residual = metric;
    if (omega == 1.0 && opt.omega != 1.0) ++sol.polish_sweeps;
    if (opt.check_energy) {
      const double next = detail::half_energy<Dim>(u, grid);
      const double rel = (next - energy) / std::max(std::abs(energy), 1e-300);
      sol.max_energy_increase = std::max(sol.max_energy_increase, rel);
      ++sol.energy_checks;
      energy = next;
    }
    if (metric <= opt.tol) {
      sol.converged = true;
      break;
    }
    best = std::min(best, metric);
    if (it % window == 0) {
      if (best > 0.5 * window_start_best && best < 1e3 * opt.tol) omega = 1.0;
      window_start_best = best;
    }
  }
  return sol;
}

/// Linearized (slit) problem: harmonic off {x_n = 0, x.e <= 0}, zero there.
template <int Dim>
Solution<Dim> solve_slit(const Grid<Dim>& grid, const BoundaryData<Dim>& data, SolverOptions opt = {}) {
  opt.thin = ThinCondition::slit;
  return solve<Dim>(grid, data, opt);
}

/// Discrete KKT residuals. Laplacians are in Laplacian units (1/h^2 scaled).
struct ComplementarityReport {
  double thin_negativity = 0.0;      // max(-u) over thin nodes
  double thin_laplacian_excess = 0.0;  // max(Lap_h u, 0) over thin nodes
  double complementarity = 0.0;      // max |u Lap_h u| over thin nodes
  double interior_residual = 0.0;    // max |Lap_h u| over interior nodes
  double max() const {
    return std::max({thin_negativity, thin_laplacian_excess, complementarity, interior_residual});
  }
};

template <int Dim>
ComplementarityReport kkt_report(const Solution<Dim>& s) {
  ComplementarityReport rep;
  const auto& grid = s.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto kind = grid.kind(i);
    if (kind == NodeKind::outer) continue;
    const double lap = discrete_laplacian<Dim>(s.u, i);
    if (kind == NodeKind::interior) {
      rep.interior_residual = std::max(rep.interior_residual, std::abs(lap));
    } else {
      if (s.thin == ThinCondition::slit) {
        if (s.u[i] != 0.0) rep.interior_residual = std::max(rep.interior_residual, std::abs(lap));
        continue;
      }
      rep.thin_negativity = std::max(rep.thin_negativity, -s.u[i]);
      rep.thin_laplacian_excess = std::max(rep.thin_laplacian_excess, lap);
      rep.complementarity = std::max(rep.complementarity, std::abs(s.u[i] * lap));
    }
  }
  return rep;
}

/// Discrete integral over thin nodes of w Lap_h w with cell weight h^n
/// (Lap_h w h approximates the thin surface density of Lap w).
template <int Dim>
double thin_wlapw_integral(const GridFunction<Dim>& w) {
  const auto& grid = w.grid();
  const double cell = std::pow(grid.spacing(), Dim);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.kind(i) == NodeKind::thin) s += w[i] * discrete_laplacian<Dim>(w, i) * cell;
  return s;
}

}  // namespace thinobs
