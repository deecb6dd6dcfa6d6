#pragma once

// Gauge functions, multipolar (line-integral) potentials and gauge
// transformations of potentials and wavefunctions.

#include "gaugelab/core.hpp"
#include "gaugelab/fields.hpp"
#include "gaugelab/quadrature.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace gaugelab {

enum class GaugeForm {
  /// chi = f(r) + g t with constant g.
  restricted,
  general,
};

struct GaugeFunction {
  using Scalar = std::function<double(Vec2, double)>;
  using Vector = std::function<Vec2(Vec2, double)>;

  Scalar chi;
  Vector grad;
  /// d(chi)/dt
  Scalar rate;
  GaugeForm declared_form = GaugeForm::general;
  /// f(r) and g when declared_form is restricted.
  std::function<double(Vec2)> spatial;
  double g = 0.0;
  /// grad chi vanishes identically.
  bool spatially_uniform = false;
  std::string label;

  double value(Vec2 r, double t) const { return chi(r, t); }
  Vec2 gradient(Vec2 r, double t) const { return grad(r, t); }
  double time_derivative(Vec2 r, double t) const { return rate(r, t); }
};

/// Polynomial in (x, y): sum of c * x^px * y^py.
struct Polynomial2 {
  struct Term {
    int px = 0;
    int py = 0;
    double c = 0.0;
  };
  std::vector<Term> terms;

  int degree() const {
    int d = 0;
    for (const auto& t : terms) d = std::max(d, t.px + t.py);
    return d;
  }
  double operator()(Vec2 r) const {
    double s = 0.0;
    for (const auto& t : terms) s += t.c * std::pow(r.x, t.px) * std::pow(r.y, t.py);
    return s;
  }
  Vec2 gradient(Vec2 r) const {
    Vec2 g;
    for (const auto& t : terms) {
      if (t.px > 0) g.x += t.c * t.px * std::pow(r.x, t.px - 1) * std::pow(r.y, t.py);
      if (t.py > 0) g.y += t.c * t.py * std::pow(r.x, t.px) * std::pow(r.y, t.py - 1);
    }
    return g;
  }
};

inline GaugeFunction zero_gauge() {
  GaugeFunction f;
  f.chi = [](Vec2, double) { return 0.0; };
  f.grad = [](Vec2, double) { return Vec2{}; };
  f.rate = [](Vec2, double) { return 0.0; };
  f.declared_form = GaugeForm::restricted;
  f.spatial = [](Vec2) { return 0.0; };
  f.spatially_uniform = true;
  f.label = "zero";
  return f;
}

inline GaugeFunction constant_gauge(double c) {
  GaugeFunction f = zero_gauge();
  f.chi = [c](Vec2, double) { return c; };
  f.spatial = [c](Vec2) { return c; };
  f.label = "constant";
  return f;
}

/// chi = g t
inline GaugeFunction linear_time_gauge(double g) {
  GaugeFunction f = zero_gauge();
  f.chi = [g](Vec2, double t) { return g * t; };
  f.rate = [g](Vec2, double) { return g; };
  f.g = g;
  f.label = "linear_t";
  return f;
}

/// chi = f(r) + g t with polynomial f.
inline GaugeFunction polynomial_gauge(Polynomial2 poly, double g = 0.0) {
  GaugeFunction f;
  f.chi = [poly, g](Vec2 r, double t) { return poly(r) + g * t; };
  f.grad = [poly](Vec2 r, double) { return poly.gradient(r); };
  f.rate = [g](Vec2, double) { return g; };
  f.declared_form = GaugeForm::restricted;
  f.spatial = [poly](Vec2 r) { return poly(r); };
  f.g = g;
  f.spatially_uniform = poly.degree() == 0;
  f.label = "polynomial";
  return f;
}

/// chi = coefficient * x * t. Time-dependent gradient; violates the
/// admissibility rule.
inline GaugeFunction product_xt_gauge(double coefficient = 1.0) {
  GaugeFunction f;
  f.chi = [coefficient](Vec2 r, double t) { return coefficient * r.x * t; };
  f.grad = [coefficient](Vec2, double t) { return Vec2{coefficient * t, 0.0}; };
  f.rate = [coefficient](Vec2 r, double) { return coefficient * r.x; };
  f.label = "product_xt";
  return f;
}

/// chi = coefficient * t^2
inline GaugeFunction t_squared_gauge(double coefficient = 1.0) {
  GaugeFunction f;
  f.chi = [coefficient](Vec2, double t) { return coefficient * t * t; };
  f.grad = [](Vec2, double) { return Vec2{}; };
  f.rate = [coefficient](Vec2, double t) { return 2.0 * coefficient * t; };
  f.spatially_uniform = true;
  f.label = "t_squared";
  return f;
}

/// Pointwise sum; restricted iff both summands are.
inline GaugeFunction operator+(const GaugeFunction& a, const GaugeFunction& b) {
  GaugeFunction f;
  f.chi = [a, b](Vec2 r, double t) { return a.chi(r, t) + b.chi(r, t); };
  f.grad = [a, b](Vec2 r, double t) { return a.grad(r, t) + b.grad(r, t); };
  f.rate = [a, b](Vec2 r, double t) { return a.rate(r, t) + b.rate(r, t); };
  if (a.declared_form == GaugeForm::restricted && b.declared_form == GaugeForm::restricted) {
    f.declared_form = GaugeForm::restricted;
    f.spatial = [a, b](Vec2 r) { return a.spatial(r) + b.spatial(r); };
    f.g = a.g + b.g;
  }
  f.spatially_uniform = a.spatially_uniform && b.spatially_uniform;
  f.label = a.label + "+" + b.label;
  return f;
}

/// chi(r, t) = integral from T to t of phi(r, t') dt', by composite
/// Gauss-Legendre quadrature in time. rate is phi itself; grad is a central
/// difference of chi with a relative step of 1e-5.
inline GaugeFunction temporal_gauge_function(std::function<double(Vec2, double)> phi, double T,
                                             double panel_width = 0.25, int order = 8) {
  const GaussLegendre rule = make_gauss_legendre(order);
  auto chi = [phi, T, rule, panel_width](Vec2 r, double t) {
    const auto panels = static_cast<std::size_t>(std::ceil(std::abs(t - T) / panel_width));
    return integrate_composite([&](double s) { return phi(r, s); }, T, t, rule, std::max<std::size_t>(panels, 1));
  };
  GaugeFunction f;
  f.chi = chi;
  f.grad = [chi](Vec2 r, double t) {
    const double dx = 1e-5 * std::max(1.0, std::abs(r.x));
    const double dy = 1e-5 * std::max(1.0, std::abs(r.y));
    return Vec2{(chi(r + Vec2{dx, 0.0}, t) - chi(r - Vec2{dx, 0.0}, t)) / (2.0 * dx),
                (chi(r + Vec2{0.0, dy}, t) - chi(r - Vec2{0.0, dy}, t)) / (2.0 * dy)};
  };
  f.rate = [phi](Vec2 r, double t) { return phi(r, t); };
  f.label = "temporal";
  return f;
}

/// Largest relative disagreement between the supplied derivative maps and
/// central differences of chi on the grid nodes at the given times.
inline double gauge_consistency_residual(const GaugeFunction& f, const Grid& grid, const std::vector<double>& times,
                                         double step = 1e-5) {
  double worst = 0.0;
  for (double t : times) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Vec2 r = grid.node(k);
      const double chi_scale = std::max(1.0, std::abs(f.chi(r, t)));
      const Vec2 g = f.grad(r, t);
      const double gx = (f.chi(r + Vec2{step, 0.0}, t) - f.chi(r - Vec2{step, 0.0}, t)) / (2.0 * step);
      const double gy = grid.dim() == 2
                            ? (f.chi(r + Vec2{0.0, step}, t) - f.chi(r - Vec2{0.0, step}, t)) / (2.0 * step)
                            : g.y;
      const double gt = (f.chi(r, t + step) - f.chi(r, t - step)) / (2.0 * step);
      const double scale = std::max({chi_scale, norm(g), std::abs(f.rate(r, t))});
      worst = std::max({worst, std::abs(gx - g.x) / scale, std::abs(gy - g.y) / scale,
                        std::abs(gt - f.rate(r, t)) / scale});
    }
  }
  return worst;
}

struct GaugeClassification {
  bool allowed = false;
  /// max |d^2 chi / dt^2| probed by central differences over the times.
  double second_time_derivative = 0.0;
  /// max over times of the spatial spread (max - min) of d(chi)/dt.
  double rate_spread = 0.0;
  double tolerance = 0.0;

  bool time_linearity_violated() const { return second_time_derivative > tolerance; }
  bool spatial_uniformity_violated() const { return rate_spread > tolerance; }
};

/// Admissibility test: chi must be linear in t with an r-independent rate.
/// The absolute tolerance is scaled by max(1, max |chi|) over the samples.
inline GaugeClassification validate_gauge_function(const GaugeFunction& f, const Grid& grid,
                                                   const std::vector<double>& times, double abs_tol = 1e-8) {
  if (times.size() < 3) throw InvalidInput("validate_gauge_function needs at least 3 time samples");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InvalidInput("validate_gauge_function needs strictly increasing times");
  }
  GaugeClassification c;
  double magnitude = 1.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 r = grid.node(k);
    std::vector<double> values(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      values[i] = f.chi(r, times[i]);
      magnitude = std::max(magnitude, std::abs(values[i]));
    }
    for (std::size_t i = 1; i + 1 < times.size(); ++i) {
      const double left = (values[i] - values[i - 1]) / (times[i] - times[i - 1]);
      const double right = (values[i + 1] - values[i]) / (times[i + 1] - times[i]);
      const double second = 2.0 * (right - left) / (times[i + 1] - times[i - 1]);
      c.second_time_derivative = std::max(c.second_time_derivative, std::abs(second));
    }
  }
  for (double t : times) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double rate = f.rate(grid.node(k), t);
      lo = std::min(lo, rate);
      hi = std::max(hi, rate);
    }
    c.rate_spread = std::max(c.rate_spread, hi - lo);
  }
  c.tolerance = abs_tol * magnitude;
  c.allowed = !c.time_linearity_violated() && !c.spatial_uniformity_violated();
  return c;
}

enum class Provenance { multipolar, transformed, expanded, other };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::multipolar: return "multipolar";
    case Provenance::transformed: return "transformed";
    case Provenance::expanded: return "expanded";
    default: return "other";
  }
}

/// Gauss-Legendre order used for edge integrals of A.
inline constexpr int kLinkQuadratureOrder = 6;

struct PotentialSet {
  std::function<Vec2(Vec2, double)> A;
  std::function<double(Vec2, double)> phi;
  /// Line integral of A along the segment a -> b at time t.
  std::function<double(Vec2, Vec2, double)> link;
  Provenance provenance = Provenance::other;
  Vec2 R;
  /// False when A vanishes identically.
  bool magnetic = true;
  std::string label;
  std::shared_ptr<const PotentialSet> base;
  std::shared_ptr<const GaugeFunction> gauge;

  Vec2 vector_potential(Vec2 r, double t) const { return A(r, t); }
  double scalar_potential(Vec2 r, double t) const { return phi(r, t); }
  double link_integral(Vec2 a, Vec2 b, double t) const { return magnetic ? link(a, b, t) : 0.0; }
};

/// Edge integral of A by Gauss-Legendre quadrature.
inline std::function<double(Vec2, Vec2, double)> quadrature_link(std::function<Vec2(Vec2, double)> A) {
  const GaussLegendre rule = make_gauss_legendre(kLinkQuadratureOrder);
  return [A = std::move(A), rule](Vec2 a, Vec2 b, double t) {
    const Vec2 d = b - a;
    return rule.integrate([&](double u) { return dot(A(a + u * d, t), d); });
  };
}

inline PotentialSet zero_potentials() {
  PotentialSet p;
  p.A = [](Vec2, double) { return Vec2{}; };
  p.phi = [](Vec2, double) { return 0.0; };
  p.link = [](Vec2, Vec2, double) { return 0.0; };
  p.magnetic = false;
  p.label = "zero";
  return p;
}

/// -(r - R) x integral_0^1 B(u r + (1-u) R, t) u du
inline Vec2 multipolar_A(const FieldSpec& spec, Vec2 R, Vec2 r, double t, const GaussLegendre& rule) {
  if (!spec.is_magnetic()) return {};
  const Vec2 d = r - R;
  const double weighted = rule.integrate([&](double u) { return spec.B(R + u * d, t) * u; });
  return -cross_z(d, weighted);
}

/// -(r - R) . integral_0^1 E(u r + (1-u) R, t) du
inline double multipolar_phi(const FieldSpec& spec, Vec2 R, Vec2 r, double t, const GaussLegendre& rule) {
  const Vec2 d = r - R;
  const Vec2 mean = rule.integrate([&](double u) { return spec.E(R + u * d, t); });
  return -dot(d, mean);
}

inline Vec2 multipolar_A(const FieldSpec& spec, Vec2 R, Vec2 r, double t, int quad_order = 16) {
  if (quad_order < 2) throw InvalidInput("multipolar_A: quadrature order must be at least 2");
  return multipolar_A(spec, R, r, t, make_gauss_legendre(quad_order));
}

inline double multipolar_phi(const FieldSpec& spec, Vec2 R, Vec2 r, double t, int quad_order = 16) {
  if (quad_order < 2) throw InvalidInput("multipolar_phi: quadrature order must be at least 2");
  return multipolar_phi(spec, R, r, t, make_gauss_legendre(quad_order));
}

inline PotentialSet multipolar_potentials(const FieldSpec& spec, Vec2 R, int quad_order = 16) {
  if (quad_order < 2) throw InvalidInput("multipolar_potentials: quadrature order must be at least 2");
  const GaussLegendre rule = make_gauss_legendre(quad_order);
  PotentialSet p;
  p.A = [spec, R, rule](Vec2 r, double t) { return multipolar_A(spec, R, r, t, rule); };
  p.phi = [spec, R, rule](Vec2 r, double t) { return multipolar_phi(spec, R, r, t, rule); };
  p.link = quadrature_link(p.A);
  p.provenance = Provenance::multipolar;
  p.R = R;
  p.magnetic = spec.is_magnetic();
  p.label = "multipolar";
  return p;
}

/// A + grad chi, phi - d(chi)/dt. Edge integrals pick up chi(b) - chi(a)
/// exactly, which keeps discretized Hamiltonians exactly gauge covariant.
inline PotentialSet apply_gauge_to_potentials(const PotentialSet& base, const GaugeFunction& chi) {
  auto b = std::make_shared<const PotentialSet>(base);
  auto g = std::make_shared<const GaugeFunction>(chi);
  PotentialSet p;
  p.A = [b, g](Vec2 r, double t) { return b->A(r, t) + g->grad(r, t); };
  p.phi = [b, g](Vec2 r, double t) { return b->phi(r, t) - g->rate(r, t); };
  p.link = [b, g](Vec2 x0, Vec2 x1, double t) {
    return b->link_integral(x0, x1, t) + (g->chi(x1, t) - g->chi(x0, t));
  };
  p.provenance = Provenance::transformed;
  p.R = base.R;
  p.magnetic = base.magnetic || !chi.spatially_uniform;
  p.label = base.label + "|" + chi.label;
  p.base = std::move(b);
  p.gauge = std::move(g);
  return p;
}

/// Multiplies psi by exp(i e chi(r, psi.time) / hbar).
inline Wavefunction apply_gauge_to_wavefunction(const Wavefunction& psi, const GaugeFunction& chi,
                                                const PhysicalConstants& constants) {
  const Grid& grid = psi.grid();
  CVector v = psi.values();
  const double k = constants.e / constants.hbar;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const double phase = k * chi.chi(grid.node(n), psi.time());
    v[static_cast<Eigen::Index>(n)] *= std::polar(1.0, phase);
  }
  return Wavefunction(grid, std::move(v), psi.time());
}

}  // namespace gaugelab
