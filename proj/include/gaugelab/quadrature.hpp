#pragma once

#include "gaugelab/core.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace gaugelab {

/// Gauss-Legendre rule mapped to the unit interval [0, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t order() const { return nodes.size(); }

  template <class F>
  auto integrate(F&& f) const {
    auto sum = weights[0] * f(nodes[0]);
    for (std::size_t i = 1; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// Nodes from Newton iteration on P_n started at the Chebyshev guess.
inline GaussLegendre make_gauss_legendre(int order) {
  if (order < 1) throw InvalidInput("Gauss-Legendre order must be positive");
  const auto n = static_cast<std::size_t>(order);
  GaussLegendre rule{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = pk;
    }
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // [-1, 1] -> [0, 1]
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

/// Composite Gauss-Legendre integral of f over [a, b] with `panels` panels.
template <class F>
double integrate_composite(F&& f, double a, double b, const GaussLegendre& rule, std::size_t panels) {
  if (panels == 0 || a == b) return 0.0;
  const double width = (b - a) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + static_cast<double>(p) * width;
    sum += width * rule.integrate([&](double u) { return f(lo + u * width); });
  }
  return sum;
}

}  // namespace gaugelab
