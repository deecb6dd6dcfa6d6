#pragma once

// Taylor expansion of the time-dependent multipolar potentials about the
// reference point, and truncation error against the exact line integrals.

#include "gaugelab/fields.hpp"
#include "gaugelab/gauge.hpp"

#include <array>
#include <limits>
#include <string>
#include <vector>

namespace gaugelab {

enum class MultipoleOrder { dipole, quadrupole };

inline const char* to_string(MultipoleOrder o) { return o == MultipoleOrder::dipole ? "dipole" : "quadrupole"; }

/// Row-major 2x2 matrix {dEx/dx, dEx/dy, dEy/dx, dEy/dy}.
using Jacobian2 = std::array<double, 4>;

struct MultipoleExpansion {
  Vec2 R;
  std::function<Vec2(double)> E1_at_R;
  std::function<Jacobian2(double)> gradE1_at_R;
  std::function<double(double)> B1_at_R;
  MultipoleOrder order = MultipoleOrder::quadrupole;
};

/// Field derivatives at R come from central differences of width 2*step.
inline MultipoleExpansion make_multipole_expansion(const FieldSpec& spec, Vec2 R, double step,
                                                   MultipoleOrder order = MultipoleOrder::quadrupole) {
  if (!(step > 0.0)) throw InvalidInput("multipole expansion step must be positive");
  const FieldSpec dyn = spec.dynamic_part();
  MultipoleExpansion exp;
  exp.R = R;
  exp.order = order;
  exp.E1_at_R = [dyn, R](double t) { return dyn.E1(R, t); };
  exp.gradE1_at_R = [dyn, R, step](double t) {
    const Vec2 dx = (dyn.E1(R + Vec2{step, 0.0}, t) - dyn.E1(R - Vec2{step, 0.0}, t)) / (2.0 * step);
    const Vec2 dy = (dyn.E1(R + Vec2{0.0, step}, t) - dyn.E1(R - Vec2{0.0, step}, t)) / (2.0 * step);
    return Jacobian2{dx.x, dy.x, dx.y, dy.y};
  };
  exp.B1_at_R = [dyn, R](double t) { return dyn.B1(R, t); };
  return exp;
}

/// Dipole: -(r-R).E1(R,t). Quadrupole adds
/// -1/2 sum_ij (x_i - X_i)(x_j - X_j) dE_i/dx_j (R,t).
inline double expand_phi1(const MultipoleExpansion& exp, Vec2 r, double t) {
  const Vec2 d = r - exp.R;
  double phi = -dot(d, exp.E1_at_R(t));
  if (exp.order == MultipoleOrder::quadrupole) {
    const Jacobian2 J = exp.gradE1_at_R(t);
    const double quad = d.x * d.x * J[0] + d.x * d.y * (J[1] + J[2]) + d.y * d.y * J[3];
    phi -= 0.5 * quad;
  }
  return phi;
}

/// -(r-R) x B1(R,t)/2. Higher magnetic multipoles are not represented.
inline Vec2 expand_A1(const MultipoleExpansion& exp, Vec2 r, double t) {
  return -0.5 * cross_z(r - exp.R, exp.B1_at_R(t));
}

inline PotentialSet expanded_potentials(const MultipoleExpansion& exp) {
  PotentialSet p;
  p.A = [exp](Vec2 r, double t) { return expand_A1(exp, r, t); };
  p.phi = [exp](Vec2 r, double t) { return expand_phi1(exp, r, t); };
  p.link = quadrature_link(p.A);
  p.provenance = Provenance::expanded;
  p.R = exp.R;
  p.label = std::string("expanded_") + to_string(exp.order);
  return p;
}

struct TruncationRow {
  std::string order;
  std::string quantity;
  double max_error = 0.0;
  /// max_error on the full grid divided by max_error on the grid whose
  /// extent is halved about R. NaN when the half-extent error vanishes.
  double shrink_ratio = 0.0;
};

struct TruncationReport {
  std::vector<TruncationRow> rows;

  const TruncationRow& row(const std::string& order, const std::string& quantity) const {
    for (const auto& r : rows) {
      if (r.order == order && r.quantity == quantity) return r;
    }
    throw InvalidInput("truncation report has no row " + order + "/" + quantity);
  }
};

namespace detail {

struct TruncationErrors {
  double phi_dipole = 0.0;
  double phi_quadrupole = 0.0;
  double A_dipole = 0.0;
};

inline TruncationErrors truncation_errors(const FieldSpec& dyn, Vec2 R, const Grid& grid, double t,
                                          const GaussLegendre& rule, double step) {
  const MultipoleExpansion dip = make_multipole_expansion(dyn, R, step, MultipoleOrder::dipole);
  const MultipoleExpansion quad = make_multipole_expansion(dyn, R, step, MultipoleOrder::quadrupole);
  TruncationErrors e;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 r = grid.node(k);
    const double phi = multipolar_phi(dyn, R, r, t, rule);
    const Vec2 A = multipolar_A(dyn, R, r, t, rule);
    e.phi_dipole = std::max(e.phi_dipole, std::abs(expand_phi1(dip, r, t) - phi));
    e.phi_quadrupole = std::max(e.phi_quadrupole, std::abs(expand_phi1(quad, r, t) - phi));
    e.A_dipole = std::max(e.A_dipole, norm(expand_A1(dip, r, t) - A));
  }
  return e;
}

}  // namespace detail

/// Max-over-grid truncation error of each expansion order of phi1 and A1,
/// and the factor by which it shrinks when the grid extent is halved about R.
inline TruncationReport truncation_report(const FieldSpec& spec, Vec2 R, const Grid& grid, double t,
                                          int quad_order = 16) {
  const FieldSpec dyn = spec.dynamic_part();
  const GaussLegendre rule = make_gauss_legendre(quad_order);
  const double step = 0.25 * grid.h(0);
  const auto full = detail::truncation_errors(dyn, R, grid, t, rule, step);
  const auto half = detail::truncation_errors(dyn, R, grid.scaled(0.5, R), t, rule, step);
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : std::numeric_limits<double>::quiet_NaN(); };
  TruncationReport report;
  report.rows.push_back({"dipole", "phi1", full.phi_dipole, ratio(full.phi_dipole, half.phi_dipole)});
  report.rows.push_back({"quadrupole", "phi1", full.phi_quadrupole, ratio(full.phi_quadrupole, half.phi_quadrupole)});
  report.rows.push_back({"dipole", "A1", full.A_dipole, ratio(full.A_dipole, half.A_dipole)});
  return report;
}

}  // namespace gaugelab
