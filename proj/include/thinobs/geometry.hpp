#pragma once

// Uniform lattice over the half-domain [-R,R]^{n-1} x [0,R], fields sampled on
// it with implicit even reflection across {x_n = 0}, and the sphere/ball
// quadratures every diagnostic is built on.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <type_traits>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "thinobs/error.hpp"
#include "thinobs/quadrature.hpp"

namespace thinobs {

// Distinct types (not aliases) so that Dim deduces from arguments.
template <int Dim>
struct Point : std::array<double, Dim> {};

template <int Dim>
struct Index : std::array<int, Dim> {};

template <int Dim>
constexpr double dot(const Point<Dim>& a, const Point<Dim>& b) {
  double s = 0.0;
  for (int k = 0; k < Dim; ++k) s += a[k] * b[k];
  return s;
}

template <int Dim>
double norm(const Point<Dim>& a) {
  return std::sqrt(dot<Dim>(a, a));
}

template <int Dim>
constexpr Point<Dim> operator+(const Point<Dim>& a, const Point<Dim>& b) {
  Point<Dim> c{};
  for (int k = 0; k < Dim; ++k) c[k] = a[k] + b[k];
  return c;
}

template <int Dim>
constexpr Point<Dim> operator-(const Point<Dim>& a, const Point<Dim>& b) {
  Point<Dim> c{};
  for (int k = 0; k < Dim; ++k) c[k] = a[k] - b[k];
  return c;
}

template <int Dim>
constexpr Point<Dim> operator*(double s, const Point<Dim>& a) {
  Point<Dim> c{};
  for (int k = 0; k < Dim; ++k) c[k] = s * a[k];
  return c;
}

/// Surface measure of the unit sphere in R^Dim.
template <int Dim>
constexpr double unit_sphere_measure() {
  return Dim == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
}

/// Volume of the unit ball in R^Dim.
template <int Dim>
constexpr double unit_ball_volume() {
  return Dim == 2 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0;
}

enum class NodeKind : std::uint8_t { interior, thin, outer };

/// Throws unless (dimension, resolution, half_width) describes a valid grid.
inline void validate_grid_request(int dimension, int resolution, double half_width) {
  if (dimension != 2 && dimension != 3)
    throw Error("dimension must be 2 or 3, got " + std::to_string(dimension));
  if (resolution % 2 == 0) throw Error("resolution must be odd, got " + std::to_string(resolution));
  if (resolution < 17) throw Error("resolution must be at least 17, got " + std::to_string(resolution));
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw Error("half-width must be positive");
}

/// Lattice over [-R,R]^{Dim-1} x [0,R]. Tangential axes carry `resolution`
/// nodes, the normal axis (Dim-1) carries (resolution+1)/2, so x_n = 0 is an
/// exact lattice plane. Storage is row-major with the normal axis fastest.
template <int Dim>
class Grid {
  static_assert(Dim == 2 || Dim == 3, "only n = 2 and n = 3 are supported");

 public:
  static constexpr int dimension = Dim;

  Grid(int resolution, double half_width)
      : resolution_(resolution),
        normal_nodes_((resolution - 1) / 2 + 1),
        half_width_(half_width),
        spacing_(2.0 * half_width / (resolution - 1)) {
    validate_grid_request(Dim, resolution, half_width);
    for (int k = 0; k < Dim - 1; ++k) extents_[k] = resolution_;
    extents_[Dim - 1] = normal_nodes_;
    strides_[Dim - 1] = 1;
    for (int k = Dim - 2; k >= 0; --k) strides_[k] = strides_[k + 1] * extents_[k + 1];
    size_ = strides_[0] * extents_[0];
  }

  int resolution() const { return resolution_; }
  int normal_nodes() const { return normal_nodes_; }
  double half_width() const { return half_width_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return size_; }
  const Index<Dim>& extents() const { return extents_; }
  std::size_t stride(int axis) const { return strides_[axis]; }

  std::size_t index(const Index<Dim>& ijk) const {
    std::size_t idx = 0;
    for (int k = 0; k < Dim; ++k) idx += static_cast<std::size_t>(ijk[k]) * strides_[k];
    return idx;
  }

  Index<Dim> multi_index(std::size_t idx) const {
    Index<Dim> ijk{};
    for (int k = 0; k < Dim; ++k) {
      ijk[k] = static_cast<int>(idx / strides_[k]);
      idx %= strides_[k];
    }
    return ijk;
  }

  Point<Dim> position(const Index<Dim>& ijk) const {
    Point<Dim> x{};
    for (int k = 0; k < Dim - 1; ++k) x[k] = -half_width_ + ijk[k] * spacing_;
    x[Dim - 1] = ijk[Dim - 1] * spacing_;
    return x;
  }

  Point<Dim> position(std::size_t idx) const { return position(multi_index(idx)); }

  NodeKind kind(const Index<Dim>& ijk) const {
    for (int k = 0; k < Dim - 1; ++k)
      if (ijk[k] == 0 || ijk[k] == resolution_ - 1) return NodeKind::outer;
    if (ijk[Dim - 1] == normal_nodes_ - 1) return NodeKind::outer;
    return ijk[Dim - 1] == 0 ? NodeKind::thin : NodeKind::interior;
  }

  NodeKind kind(std::size_t idx) const { return kind(multi_index(idx)); }

  /// True when the closed ball B_r(center) lies in the reflected cube [-R,R]^Dim.
  bool contains_ball(const Point<Dim>& center, double r) const {
    const double slack = 1e-12 * half_width_;
    for (int k = 0; k < Dim; ++k)
      if (std::abs(center[k]) + r > half_width_ + slack) return false;
    return true;
  }

  bool operator==(const Grid& other) const {
    return resolution_ == other.resolution_ && half_width_ == other.half_width_;
  }

 private:
  int resolution_;
  int normal_nodes_;
  double half_width_;
  double spacing_;
  Index<Dim> extents_{};
  Index<Dim> strides_{};
  std::size_t size_ = 0;
};

/// Validating factory; same checks as the constructor, named for call sites
/// that read better as a build step.
template <int Dim>
Grid<Dim> build_grid(int resolution, double half_width = 2.0) {
  return Grid<Dim>(resolution, half_width);
}

/// Scalar field on a Grid. Values live on {x_n >= 0}; evaluation at negative
/// x_n reads the mirror image, so evenness holds by construction.
template <int Dim>
class GridFunction {
 public:
  explicit GridFunction(Grid<Dim> grid, double fill = 0.0) : grid_(grid), values_(grid.size(), fill) {}

  GridFunction(Grid<Dim> grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw Error("value count does not match grid size");
  }

  /// Samples an analytic field at every node.
  template <class F>
  static GridFunction sample(const Grid<Dim>& grid, F&& f) {
    GridFunction g(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) g.values_[i] = f(grid.position(i));
    return g;
  }

  const Grid<Dim>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double at(const Index<Dim>& ijk) const { return values_[grid_.index(ijk)]; }

  /// Multilinear interpolation of the even-reflected field.
  double operator()(const Point<Dim>& x) const {
    Index<Dim> cell{};
    Point<Dim> t{};
    locate(x, cell, t);
    double v = 0.0;
    for (int c = 0; c < (1 << Dim); ++c) {
      double w = 1.0;
      Index<Dim> node = cell;
      for (int k = 0; k < Dim; ++k) {
        const int bit = (c >> k) & 1;
        node[k] += bit;
        w *= bit ? t[k] : 1.0 - t[k];
      }
      if (w != 0.0) v += w * at(node);
    }
    return v;
  }

  /// Gradient of the multilinear interpolant (one-sided at cell faces).
  Point<Dim> gradient(const Point<Dim>& x) const {
    Index<Dim> cell{};
    Point<Dim> t{};
    locate(x, cell, t);
    Point<Dim> g{};
    const double h = grid_.spacing();
    for (int c = 0; c < (1 << Dim); ++c) {
      Index<Dim> node = cell;
      for (int k = 0; k < Dim; ++k) node[k] += (c >> k) & 1;
      const double v = at(node);
      for (int d = 0; d < Dim; ++d) {
        double w = 1.0;
        for (int k = 0; k < Dim; ++k) {
          const int bit = (c >> k) & 1;
          if (k == d)
            w *= bit ? 1.0 : -1.0;
          else
            w *= bit ? t[k] : 1.0 - t[k];
        }
        g[d] += w * v / h;
      }
    }
    if (x[Dim - 1] < 0.0) g[Dim - 1] = -g[Dim - 1];
    return g;
  }

  GridFunction& operator-=(const GridFunction& other) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
  }

  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }

 private:
  // Cell index and local coordinates of x after folding x_n -> |x_n|.
  void locate(const Point<Dim>& x, Index<Dim>& cell, Point<Dim>& t) const {
    const double h = grid_.spacing();
    const double R = grid_.half_width();
    const double slack = 1e-12 * R;
    for (int k = 0; k < Dim; ++k) {
      const bool normal = (k == Dim - 1);
      const double y = normal ? std::abs(x[k]) : x[k];
      if (!(std::abs(y) <= R + slack)) throw Error("evaluation point outside the grid domain");
      const double s = normal ? y / h : (y + R) / h;
      const int last = grid_.extents()[k] - 2;
      const int i = std::clamp(static_cast<int>(std::floor(s)), 0, last);
      cell[k] = i;
      t[k] = std::clamp(s - i, 0.0, 1.0);
    }
  }

  Grid<Dim> grid_;
  std::vector<double> values_;
};

template <class F, int Dim>
concept ScalarField = requires(const F& f, const Point<Dim>& p) {
  { f(p) } -> std::convertible_to<double>;
};

template <class T>
struct is_grid_function : std::false_type {};
template <int Dim>
struct is_grid_function<GridFunction<Dim>> : std::true_type {};

/// Trace of a field on a sphere with quadrature weights over the unit sphere.
template <int Dim>
struct SphericalSample {
  struct Node {
    Point<Dim> direction;
    double weight;
    double value;
  };
  Point<Dim> center{};
  double radius = 0.0;
  std::vector<Node> nodes;

  double weight_sum() const {
    double s = 0.0;
    for (const auto& n : nodes) s += n.weight;
    return s;
  }
  double integral() const {
    double s = 0.0;
    for (const auto& n : nodes) s += n.weight * n.value;
    return s;
  }
  /// Integral of value^2 over the unit sphere, i.e. H_0(r).
  double integral_sq() const {
    double s = 0.0;
    for (const auto& n : nodes) s += n.weight * n.value * n.value;
    return s;
  }
};

/// Directions and weights on the unit sphere. n = 2: m uniform angles
/// starting at 0 (nodes sit on the thin axis). n = 3: polar axis x_3, with
/// Gauss-Legendre in cos(theta) on each hemisphere separately (m/4 nodes
/// each) times m uniform azimuths.
template <int Dim>
std::vector<std::pair<Point<Dim>, double>> sphere_rule(int m) {
  std::vector<std::pair<Point<Dim>, double>> rule;
  const double two_pi = 2.0 * std::numbers::pi;
  if constexpr (Dim == 2) {
    rule.reserve(m);
    for (int k = 0; k < m; ++k) {
      const double th = two_pi * k / m;
      rule.push_back({Point<2>{std::cos(th), std::sin(th)}, two_pi / m});
    }
  } else {
    const int polar = std::max(m / 4, 8);
    const auto gl = quadrature::gauss_legendre(polar, 0.0, 1.0);
    rule.reserve(2 * polar * m);
    for (int hemi = 0; hemi < 2; ++hemi) {
      for (int p = 0; p < polar; ++p) {
        const double c = hemi == 0 ? gl.nodes[p] : -gl.nodes[p];
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        for (int k = 0; k < m; ++k) {
          const double ph = two_pi * k / m;
          rule.push_back({Point<3>{s * std::cos(ph), s * std::sin(ph), c}, gl.weights[p] * two_pi / m});
        }
      }
    }
  }
  return rule;
}

/// Samples f on the sphere of radius r about x0. Grid fields are checked
/// against the domain and the r >= 4h accuracy floor; analytic fields are not.
template <int Dim, class F>
  requires ScalarField<F, Dim>
SphericalSample<Dim> sample_sphere(const F& f, const Point<Dim>& x0, double r, int m) {
  if (m < 64) throw Error("sample_sphere needs at least 64 angular nodes");
  if (!(r > 0.0)) throw Error("sphere radius must be positive");
  if constexpr (is_grid_function<std::remove_cvref_t<F>>::value) {
    const auto& grid = f.grid();
    if (r < 4.0 * grid.spacing() * (1.0 - 1e-12)) throw Error("sphere radius below the 4h accuracy floor");
    if (!grid.contains_ball(x0, r)) throw Error("sphere exits the grid domain");
  }
  SphericalSample<Dim> s;
  s.center = x0;
  s.radius = r;
  const auto rule = sphere_rule<Dim>(m);
  s.nodes.reserve(rule.size());
  for (const auto& [dir, w] : rule) s.nodes.push_back({dir, w, static_cast<double>(f(x0 + r * dir))});
  return s;
}

/// Integral over B_r(x0) of integrand(value, gradient) for the multilinear
/// interpolant of f. Every lattice cell meeting the ball is split into
/// `subdiv`^Dim sub-cells evaluated at their midpoints; a midpoint counts iff
/// it lies in the closed ball, so the result is monotone in r for
/// nonnegative integrands.
template <int Dim, class Integrand>
double integrate_ball(const GridFunction<Dim>& f, const Point<Dim>& x0, double r, Integrand&& integrand,
                      int subdiv = Dim == 2 ? 8 : 4) {
  const auto& grid = f.grid();
  if (!grid.contains_ball(x0, r)) throw Error("ball exits the grid domain");
  const double h = grid.spacing();
  const double R = grid.half_width();
  const int M = grid.normal_nodes();

  // Cell ranges; the normal axis runs over the reflected lattice.
  Index<Dim> lo{}, hi{};
  for (int k = 0; k < Dim; ++k) {
    const bool normal = (k == Dim - 1);
    const double origin = normal ? 0.0 : -R;
    const int min_cell = normal ? -(M - 1) : 0;
    const int max_cell = normal ? M - 2 : grid.resolution() - 2;
    lo[k] = std::clamp(static_cast<int>(std::floor((x0[k] - r - origin) / h)), min_cell, max_cell);
    hi[k] = std::clamp(static_cast<int>(std::floor((x0[k] + r - origin) / h)), min_cell, max_cell);
  }

  const int corners = 1 << Dim;
  int sub_total = 1;
  for (int k = 0; k < Dim; ++k) sub_total *= subdiv;
  // Per sub-point: local offset, corner weights, and corner derivative weights.
  std::vector<Point<Dim>> offsets(sub_total);
  std::vector<double> wval(sub_total * corners);
  std::vector<double> wgrad(sub_total * corners * Dim);
  for (int s = 0; s < sub_total; ++s) {
    Point<Dim> t{};
    int rem = s;
    for (int k = 0; k < Dim; ++k) {
      t[k] = (rem % subdiv + 0.5) / subdiv;
      rem /= subdiv;
    }
    offsets[s] = t;
    for (int c = 0; c < corners; ++c) {
      double w = 1.0;
      for (int k = 0; k < Dim; ++k) w *= ((c >> k) & 1) ? t[k] : 1.0 - t[k];
      wval[s * corners + c] = w;
      for (int d = 0; d < Dim; ++d) {
        double g = 1.0;
        for (int k = 0; k < Dim; ++k) {
          const int bit = (c >> k) & 1;
          g *= (k == d) ? (bit ? 1.0 : -1.0) : (bit ? t[k] : 1.0 - t[k]);
        }
        wgrad[(s * corners + c) * Dim + d] = g / h;
      }
    }
  }

  const double cell_weight = std::pow(h / subdiv, Dim);
  const double r2 = r * r;
  double total = 0.0;
  std::array<double, 8> cv{};
  Index<Dim> cell = lo;
  while (true) {
    Point<Dim> corner_pos{};
    double dist2 = 0.0;  // distance from x0 to the cell box
    for (int k = 0; k < Dim; ++k) {
      const bool normal = (k == Dim - 1);
      corner_pos[k] = (normal ? 0.0 : -R) + cell[k] * h;
      const double a = corner_pos[k], b = a + h;
      const double d = x0[k] < a ? a - x0[k] : (x0[k] > b ? x0[k] - b : 0.0);
      dist2 += d * d;
    }
    if (dist2 <= r2) {
      for (int c = 0; c < corners; ++c) {
        Index<Dim> node = cell;
        for (int k = 0; k < Dim; ++k) node[k] += (c >> k) & 1;
        node[Dim - 1] = std::abs(node[Dim - 1]);
        cv[c] = f.at(node);
      }
      for (int s = 0; s < sub_total; ++s) {
        Point<Dim> p{};
        double pd2 = 0.0;
        for (int k = 0; k < Dim; ++k) {
          p[k] = corner_pos[k] + offsets[s][k] * h;
          const double d = p[k] - x0[k];
          pd2 += d * d;
        }
        if (pd2 > r2) continue;
        double v = 0.0;
        Point<Dim> g{};
        for (int c = 0; c < corners; ++c) {
          v += wval[s * corners + c] * cv[c];
          for (int d = 0; d < Dim; ++d) g[d] += wgrad[(s * corners + c) * Dim + d] * cv[c];
        }
        total += cell_weight * integrand(v, g, p);
      }
    }
    int k = Dim - 1;
    while (k >= 0 && cell[k] == hi[k]) {
      cell[k] = lo[k];
      --k;
    }
    if (k < 0) break;
    ++cell[k];
  }
  return total;
}

/// Scaled Dirichlet energy r^{2-n} * int_{B_r(x0)} |grad f|^2, which equals
/// int_{B_1} |grad f_r|^2 for f_r(x) = f(x0 + r x).
template <int Dim>
double ball_energy(const GridFunction<Dim>& f, const Point<Dim>& x0, double r) {
  if (r < 4.0 * f.grid().spacing() * (1.0 - 1e-12)) throw Error("ball radius below the 4h accuracy floor");
  const double raw = integrate_ball<Dim>(f, x0, r, [](double, const Point<Dim>& g, const Point<Dim>&) {
    return dot<Dim>(g, g);
  });
  return std::pow(r, 2.0 - Dim) * raw;
}

/// Unscaled int_{B_r(x0)} f^2 over the reflected domain.
template <int Dim>
double ball_l2_sq(const GridFunction<Dim>& f, const Point<Dim>& x0, double r) {
  return integrate_ball<Dim>(f, x0, r, [](double v, const Point<Dim>&, const Point<Dim>&) { return v * v; });
}

/// ||f(x0 + r .)||^2 over the shell B_2 \ B_1, i.e. r^{-n} int_{B_{2r} \ B_r} f^2.
template <int Dim>
double shell_l2_sq(const GridFunction<Dim>& f, const Point<Dim>& x0, double r) {
  const double outer = ball_l2_sq<Dim>(f, x0, 2.0 * r);
  const double inner = ball_l2_sq<Dim>(f, x0, r);
  return std::max(0.0, outer - inner) / std::pow(r, Dim);
}

}  // namespace thinobs
