#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace thinobs::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `count` nodes on [a, b] (Newton on P_count).
inline Rule gauss_legendre(int count, double a = -1.0, double b = 1.0) {
  Rule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (count + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[count - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[count - 1 - i] = half * w;
  }
  return rule;
}

/// Integrates f over [a, b] with a composite Gauss-Legendre rule.
template <class F>
double integrate(F&& f, double a, double b, int panels = 64, int order = 16) {
  const Rule base = gauss_legendre(order);
  const double width = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    for (int k = 0; k < order; ++k) {
      const double x = lo + 0.5 * width * (base.nodes[k] + 1.0);
      sum += 0.5 * width * base.weights[k] * f(x);
    }
  }
  return sum;
}

}  // namespace thinobs::quadrature
