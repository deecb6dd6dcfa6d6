#pragma once

// Named, repeatable checks over the library. Each check function reads
// what it needs from a scenario config and returns measured values next to
// their tolerances; suites group them.

#include "gaugelab/config.hpp"
#include "gaugelab/dynamics.hpp"
#include "gaugelab/multipole.hpp"
#include "gaugelab/operators.hpp"
#include "gaugelab/quadrature.hpp"
#include "gaugelab/stationary.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace gaugelab {

enum class Relation { at_most, at_least, within, holds };

struct Check {
  std::string id;
  std::string description;
  double measured = 0.0;
  Relation relation = Relation::at_most;
  double tolerance = 0.0;
  /// Lower end of the accepted interval for Relation::within.
  double lower = 0.0;
  bool pass = false;
};

inline Check at_most(std::string id, std::string description, double measured, double tolerance) {
  return {std::move(id), std::move(description), measured, Relation::at_most, tolerance, 0.0,
          std::isfinite(measured) && measured <= tolerance};
}

inline Check at_least(std::string id, std::string description, double measured, double bound) {
  return {std::move(id), std::move(description), measured, Relation::at_least, bound, 0.0,
          std::isfinite(measured) && measured >= bound};
}

inline Check within(std::string id, std::string description, double measured, double lo, double hi) {
  return {std::move(id), std::move(description), measured, Relation::within, hi, lo,
          std::isfinite(measured) && measured >= lo && measured <= hi};
}

/// Boolean outcome; measured is 1 when the condition holds.
inline Check holds(std::string id, std::string description, bool ok) {
  return {std::move(id), std::move(description), ok ? 1.0 : 0.0, Relation::holds, 1.0, 0.0, ok};
}

inline std::string relation_text(const Check& c) {
  std::ostringstream s;
  s << std::setprecision(3);
  switch (c.relation) {
    case Relation::at_most: s << "<= " << c.tolerance; break;
    case Relation::at_least: s << ">= " << c.tolerance; break;
    case Relation::within: s << "in [" << c.lower << ", " << c.tolerance << "]"; break;
    case Relation::holds: s << "holds"; break;
  }
  return s.str();
}

struct SuiteResult {
  std::string name;
  std::vector<Check> checks;
  double wall_seconds = 0.0;

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return !checks.empty();
  }

  json to_json() const {
    json j;
    j["suite"] = name;
    j["passed"] = passed();
    j["wall_seconds"] = wall_seconds;
    j["checks"] = json::array();
    for (const auto& c : checks) {
      json cj;
      cj["id"] = c.id;
      cj["description"] = c.description;
      cj["measured"] = c.measured;
      cj["relation"] = relation_text(c);
      cj["tolerance"] = c.tolerance;
      if (c.relation == Relation::within) cj["lower"] = c.lower;
      cj["pass"] = c.pass;
      j["checks"].push_back(cj);
    }
    return j;
  }

  std::string table() const {
    std::ostringstream s;
    s << "suite " << name << ": " << (passed() ? "PASS" : "FAIL") << " (" << std::fixed << std::setprecision(2)
      << wall_seconds << " s)\n";
    s.unsetf(std::ios::fixed);
    for (const auto& c : checks) {
      s << "  " << (c.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(6) << c.id << std::setw(58)
        << c.description << std::right << std::setw(12) << std::setprecision(4) << c.measured << "  "
        << relation_text(c) << "\n";
    }
    return s.str();
  }
};

namespace detail {

inline double field_scale(const FieldSpec& f, const Grid& grid, const std::vector<double>& times) {
  double scale = 0.0;
  for (double t : times) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Vec2 r = grid.node(k);
      scale = std::max({scale, norm(f.E(r, t)), std::abs(f.B(r, t))});
    }
  }
  return scale;
}

inline double hmax(const Grid& g) { return g.dim() == 2 ? std::max(g.h(0), g.h(1)) : g.h(0); }

inline std::vector<double> evaluation_times(const FieldSpec& f, const ScenarioConfig& cfg) {
  return f.is_static() ? std::vector<double>{cfg.time} : cfg.sample_times;
}

inline PotentialSet static_potentials(const ScenarioConfig& cfg) {
  return multipolar_potentials(cfg.fields.static_part(), cfg.R, cfg.quadrature_order);
}

inline PotentialSet dynamic_potentials(const ScenarioConfig& cfg) {
  return multipolar_potentials(cfg.fields.dynamic_part(), cfg.R, cfg.quadrature_order);
}

inline StationaryBasis config_basis(const ScenarioConfig& cfg) {
  return solve_stationary(build_H0(static_potentials(cfg), zero_gauge(), cfg.grid, cfg.constants), cfg.basis_states,
                          cfg.eigen);
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

/// |<m| w(r) |n>| for a real weight sampled on the grid.
inline complex weighted_element(const StationaryBasis& b, std::size_t m, std::size_t n, const ScalarSamples& w) {
  const Wavefunction wn(b.grid(), w.cast<complex>().cwiseProduct(b.states[n].values()));
  return inner_product(b.states[m], wn);
}

inline bool expected_allowed(const GaugeFunction& chi) { return chi.declared_form == GaugeForm::restricted; }

inline const char* verdict(bool allowed) { return allowed ? "ALLOWED" : "DISALLOWED"; }

}  // namespace detail

// --- field reconstruction -------------------------------------------------

/// Multipolar A for uniform B against B x (r - R)/2 at every node, with the
/// configured quadrature order and with the minimum order 2.
inline std::vector<Check> check_uniform_b_potential(const ScenarioConfig& cfg) {
  double b = 0.0;
  bool found = false;
  for (const auto& f : cfg.families) {
    if (f.family == "uniform_static_b") {
      b += f.spec.at("b").get<double>();
      found = true;
    } else if (f.family == "gradient_static_b" || f.family == "oscillating_uniform_b" || f.family == "affine_field") {
      throw InvalidInput("uniform-B check needs uniform_static_b as the only magnetic family");
    }
  }
  if (!found) throw InvalidInput("uniform-B check needs a uniform_static_b family");
  std::vector<Check> out;
  for (int order : {cfg.quadrature_order, 2}) {
    double worst = 0.0;
    const GaussLegendre rule = make_gauss_legendre(order);
    for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
      const Vec2 r = cfg.grid.node(k);
      const Vec2 d = r - cfg.R;
      const Vec2 closed{-0.5 * b * d.y, 0.5 * b * d.x};
      worst = std::max(worst, norm(multipolar_A(cfg.fields, cfg.R, r, cfg.time, rule) - closed));
    }
    out.push_back(at_most("C1", "uniform-B potential vs B x (r-R)/2, quadrature order " + std::to_string(order), worst,
                          cfg.tolerances.uniform_b_potential));
  }
  return out;
}

/// curl A = B and -grad phi - dA/dt = E at interior nodes, per family,
/// against coefficient * h^2 * (field scale).
inline std::vector<Check> check_field_reconstruction(const ScenarioConfig& cfg) {
  std::vector<Check> out;
  const Grid& g = cfg.grid;
  const double h = detail::hmax(g);
  for (const auto& family : cfg.families) {
    const FieldSpec f = build_family(family, cfg.R);
    const PotentialSet pots = multipolar_potentials(f, cfg.R, cfg.quadrature_order);
    const auto times = detail::evaluation_times(f, cfg);
    const double scale = detail::field_scale(f, g, times);
    const double tol = cfg.tolerances.reconstruction_coefficient * h * h * scale;
    double curl_res = 0.0;
    double e_res = 0.0;
    for (double t : times) {
      const double dt = 1e-4;
      const VectorSamples A = sample_vector(g, [&](Vec2 r) { return pots.A(r, t); });
      const ScalarSamples phi = sample_scalar(g, [&](Vec2 r) { return pots.phi(r, t); });
      const VectorSamples dA = sample_vector(g, [&](Vec2 r) { return (pots.A(r, t + dt) - pots.A(r, t - dt)) / (2.0 * dt); });
      const VectorSamples grad_phi = gradient(g, phi);
      if (g.dim() == 2) {
        const ScalarSamples B = sample_scalar(g, [&](Vec2 r) { return f.B(r, t); });
        curl_res = std::max(curl_res, max_interior_abs(g, curl2d(g, A) - B));
      }
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.is_boundary(k)) continue;
        const auto i = static_cast<Eigen::Index>(k);
        const Vec2 E = f.E(g.node(k), t);
        const Vec2 rec{-grad_phi.x[i] - dA.x[i], (g.dim() == 2 ? -grad_phi.y[i] : 0.0) - dA.y[i]};
        e_res = std::max(e_res, norm(rec - (g.dim() == 2 ? E : Vec2{E.x, 0.0})));
      }
    }
    if (g.dim() == 2) out.push_back(at_most("C2", family.family + ": |curl A - B|", curl_res, tol));
    out.push_back(at_most("C2", family.family + ": |-grad phi - dA/dt - E|", e_res, tol));
  }
  return out;
}

/// Coulomb condition for current-free static families, the analytic current
/// term for B = beta x, and the Lorenz condition for the oscillating
/// uniform B.
inline std::vector<Check> check_gauge_conditions(const ScenarioConfig& cfg) {
  std::vector<Check> out;
  const Grid& g = cfg.grid;
  const double inv_c2 = 1.0 / (cfg.constants.c * cfg.constants.c);
  for (const auto& family : cfg.families) {
    const FieldSpec f = build_family(family, cfg.R);
    const PotentialSet pots = multipolar_potentials(f, cfg.R, cfg.quadrature_order);
    if (f.is_static()) {
      const ScalarSamples div = divergence(g, sample_vector(g, [&](Vec2 r) { return pots.A(r, cfg.time); }));
      if (family.family == "gradient_static_b") {
        const double beta = family.spec.at("beta").get<double>();
        const ScalarSamples current = sample_scalar(g, [&](Vec2 r) { return -beta * (r.y - cfg.R.y) / 3.0; });
        out.push_back(at_most("C3", family.family + ": |div A - (-beta (y-Y)/3)| (carries current)",
                              max_interior_abs(g, div - current), cfg.tolerances.coulomb));
      } else {
        out.push_back(at_most("C3", family.family + ": Coulomb |div A|", max_interior_abs(g, div), cfg.tolerances.coulomb));
      }
    } else if (family.family == "oscillating_uniform_b") {
      double worst = 0.0;
      for (double t : cfg.sample_times) {
        const double dt = 1e-4;
        const ScalarSamples div = divergence(g, sample_vector(g, [&](Vec2 r) { return pots.A(r, t); }));
        const ScalarSamples dphi =
            sample_scalar(g, [&](Vec2 r) { return (pots.phi(r, t + dt) - pots.phi(r, t - dt)) / (2.0 * dt); });
        worst = std::max(worst, max_interior_abs(g, div + inv_c2 * dphi));
      }
      out.push_back(at_most("C3", family.family + ": Lorenz |div A + c^-2 dphi/dt|", worst, cfg.tolerances.lorenz));
    }
  }
  if (out.empty()) throw InvalidInput("gauge-condition check found no applicable family");
  return out;
}

/// Static phi from the straight-line integral against a rectilinear path
/// R -> (x, Y) -> (x, y) integrated independently.
inline std::vector<Check> check_two_path(const ScenarioConfig& cfg) {
  const FieldSpec f = cfg.fields.static_part();
  const GaussLegendre rule = make_gauss_legendre(12);
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
    const Vec2 r = cfg.grid.node(k);
    const Vec2 corner{r.x, cfg.R.y};
    const double leg1 = integrate_composite([&](double x) { return f.E0({x, cfg.R.y}).x; }, cfg.R.x, r.x, rule, 4);
    const double leg2 = integrate_composite([&](double y) { return f.E0({r.x, y}).y; }, corner.y, r.y, rule, 4);
    const double phi = multipolar_phi(f, cfg.R, r, 0.0, cfg.quadrature_order);
    worst = std::max(worst, std::abs(phi - (-(leg1 + leg2))));
    scale = std::max(scale, std::abs(phi));
  }
  return {at_most("PATH", "static phi: straight line vs two-segment path (|phi| up to " + detail::fmt(scale) + ")",
                  worst, cfg.tolerances.two_path)};
}

/// Built-in families pass the Faraday probe; a curl-carrying user field
/// with B = 0 is flagged.
inline std::vector<Check> check_maxwell(const ScenarioConfig& cfg) {
  std::vector<Check> out;
  for (const auto& family : cfg.families) {
    const FieldSpec f = build_family(family, cfg.R);
    const MaxwellReport m = check_maxwell_consistency(f, cfg.grid, cfg.sample_times, cfg.tolerances.maxwell_coefficient);
    if (family.family == "affine_field") continue;
    out.push_back(at_most("MAXW", family.family + ": Faraday residual", m.faraday_residual, m.tolerance));
  }
  if (cfg.grid.dim() == 2) {
    const double eps = 0.01;
    const double alpha = 0.5;
    const FieldSpec bad({}, [=](Vec2 r, double t) { return Vec2{eps * (1.0 + alpha * r.y) * std::sin(t), 0.0}; }, {}, {});
    const MaxwellReport m = check_maxwell_consistency(bad, cfg.grid, {0.3, 1.0}, cfg.tolerances.maxwell_coefficient);
    out.push_back(holds("MAXW", "curl-carrying field without B flagged (residual " + detail::fmt(m.faraday_residual) + ")",
                        !m.pass));
  }
  return out;
}

// --- gauge laws -----------------------------------------------------------

/// Matrix elements of H0_chi between dressed states: uniform shift -e g and
/// unchanged off-diagonals for allowed chi, the predicted -e <m|dchi/dt|n>
/// for every chi, and the admissibility verdict.
inline std::vector<Check> check_gauge_shift(const ScenarioConfig& cfg, const StationaryBasis& basis) {
  if (cfg.gauges.empty()) throw InvalidInput("gauge-shift check needs a gauge catalogue");
  if (cfg.sample_times.size() < 3) throw InvalidInput("gauge-shift check needs at least 3 sample times");
  const PotentialSet pots0 = detail::static_potentials(cfg);
  const double e = cfg.constants.e;
  std::vector<Check> out;
  for (const auto& chi : cfg.gauges) {
    const bool allowed = detail::expected_allowed(chi);
    const double tol = allowed ? cfg.tolerances.gauge_shift : cfg.tolerances.gauge_shift_general;
    const GaugeShiftReport rep = gauge_shift_audit(pots0, chi, basis, cfg.constants, cfg.sample_times, tol);
    if (allowed) {
      const double g = chi.rate(cfg.R, cfg.sample_times.front());
      double worst = 0.0;
      for (std::size_t s = 0; s < rep.times.size(); ++s) {
        const Eigen::MatrixXcd delta = rep.dressed[s] - rep.reference;
        for (Eigen::Index n = 0; n < delta.rows(); ++n) worst = std::max(worst, std::abs(delta(n, n) - (-e * g)));
      }
      out.push_back(at_most("C4", chi.label + ": diagonal shift vs -e g = " + detail::fmt(-e * g), worst, tol));
      out.push_back(at_most("C4", chi.label + ": off-diagonal change", rep.max_offdiagonal_change, tol));
    } else if (basis.count() >= 2) {
      // Direct summation of -e <0| dchi/dt |1> at each time.
      double worst = 0.0;
      for (std::size_t s = 0; s < rep.times.size(); ++s) {
        const double t = rep.times[s];
        const ScalarSamples rate = sample_scalar(basis.grid(), [&](Vec2 r) { return chi.rate(r, t); });
        const complex predicted = -e * detail::weighted_element(basis, 0, 1, rate);
        worst = std::max(worst, std::abs((rep.dressed[s] - rep.reference)(0, 1) - predicted));
      }
      out.push_back(at_most("C4", chi.label + ": <0|dH|1> vs -e <0|dchi/dt|1>", worst, tol));
    }
    out.push_back(at_most("C4", chi.label + ": all elements vs -e <m|dchi/dt|n>", rep.prediction_mismatch, tol));
    const bool verdict_ok = rep.classification.allowed == allowed && rep.energy_interpretation_preserved == allowed;
    out.push_back(holds("C4", chi.label + ": audit verdict " + detail::verdict(rep.classification.allowed) +
                                  ", expected " + detail::verdict(allowed),
                        verdict_ok));
  }
  return out;
}

/// <m_chi|V_chi|n_chi> against <m_0|V_0|n_0> for every catalogued chi.
inline std::vector<Check> check_v_invariance(const ScenarioConfig& cfg, const StationaryBasis& basis) {
  if (cfg.gauges.empty()) throw InvalidInput("V-invariance check needs a gauge catalogue");
  const PotentialSet pots0 = detail::static_potentials(cfg);
  const PotentialSet pots1 = detail::dynamic_potentials(cfg);
  const std::size_t count = std::min<std::size_t>(6, basis.count());
  std::vector<Check> out;
  std::vector<Eigen::MatrixXcd> reference;
  for (double t : cfg.sample_times) {
    reference.push_back(matrix_elements(build_V(pots1, pots0, zero_gauge(), cfg.grid, cfg.constants, t), basis, count));
  }
  double scale = 0.0;
  for (const auto& m : reference) scale = std::max(scale, m.cwiseAbs().maxCoeff());
  for (const auto& chi : cfg.gauges) {
    double worst = 0.0;
    for (std::size_t s = 0; s < cfg.sample_times.size(); ++s) {
      const double t = cfg.sample_times[s];
      const DiscreteOperator V = build_V(pots1, pots0, chi, cfg.grid, cfg.constants, t);
      const Eigen::MatrixXcd M = matrix_elements(V, dress_basis(basis, chi, t, cfg.constants), count);
      worst = std::max(worst, (M - reference[s]).cwiseAbs().maxCoeff());
    }
    out.push_back(at_most("C9", chi.label + ": max |V_chi - V_0| over m,n < " + std::to_string(count) +
                                    " (|V| up to " + detail::fmt(scale) + ")",
                          worst, cfg.tolerances.v_invariance));
  }
  return out;
}

/// Temporal gauge of the static potential: transformed phi vanishes and the
/// gauge function is rejected.
inline std::vector<Check> check_temporal_gauge(const ScenarioConfig& cfg) {
  if (cfg.sample_times.size() < 3) throw InvalidInput("temporal-gauge check needs at least 3 sample times");
  const PotentialSet pots0 = detail::static_potentials(cfg);
  const GaugeFunction chi = temporal_gauge_function(pots0.phi, 0.0);
  const PotentialSet transformed = apply_gauge_to_potentials(pots0, chi);
  double worst = 0.0;
  double scale = 0.0;
  for (double t : cfg.sample_times) {
    for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
      const Vec2 r = cfg.grid.node(k);
      worst = std::max(worst, std::abs(transformed.phi(r, t)));
      scale = std::max(scale, std::abs(pots0.phi(r, t)));
    }
  }
  const GaugeClassification c = validate_gauge_function(chi, cfg.grid, cfg.sample_times);
  return {
      at_most("C11", "temporal gauge: max |phi_chi| (static |phi| up to " + detail::fmt(scale) + ")", worst,
              cfg.tolerances.temporal_phi),
      at_most("C11", "temporal gauge: derivative maps consistent with chi",
              gauge_consistency_residual(chi, cfg.grid, cfg.sample_times), 1e-6),
      holds("C11", std::string("temporal gauge classified ") + detail::verdict(c.allowed) + " (rate spread " +
                       detail::fmt(c.rate_spread) + ")",
            !c.allowed && c.spatial_uniformity_violated()),
  };
}

/// Hermiticity of H0 and V, and the basis contract.
inline std::vector<Check> check_operator_contracts(const ScenarioConfig& cfg, const StationaryBasis& basis) {
  const PotentialSet pots0 = detail::static_potentials(cfg);
  const PotentialSet pots1 = detail::dynamic_potentials(cfg);
  double herm = hermiticity_defect(build_H0(pots0, zero_gauge(), cfg.grid, cfg.constants), 10, cfg.eigen.seed);
  for (const auto& chi : cfg.gauges) {
    const double t = cfg.sample_times.back();
    herm = std::max(herm, hermiticity_defect(build_H0(pots0, chi, cfg.grid, cfg.constants, t), 10, cfg.eigen.seed));
    herm = std::max(herm, hermiticity_defect(build_V(pots1, pots0, chi, cfg.grid, cfg.constants, t), 10, cfg.eigen.seed));
  }
  double residual = 0.0;
  for (double r : basis.residuals) residual = std::max(residual, r);
  bool sorted = true;
  for (std::size_t i = 1; i < basis.count(); ++i) sorted = sorted && basis.energies[i] >= basis.energies[i - 1];
  return {
      at_most("OPS", "hermiticity defect of H0_chi and V_chi", herm, cfg.tolerances.hermiticity),
      at_most("OPS", "basis orthonormality defect", orthonormality_defect(basis), cfg.tolerances.orthonormality),
      at_most("OPS", "basis eigen-residual", residual, cfg.tolerances.residual),
      holds("OPS", "basis energies ascending", sorted),
  };
}

/// Admissibility verdict for each catalogued chi against its declared form.
inline std::vector<Check> check_gauge_catalogue(const ScenarioConfig& cfg) {
  std::vector<Check> out;
  for (const auto& chi : cfg.gauges) {
    const GaugeClassification c = validate_gauge_function(chi, cfg.grid, cfg.sample_times);
    const bool expected = detail::expected_allowed(chi);
    out.push_back(holds("GAUGE", chi.label + ": classified " + detail::verdict(c.allowed) + ", declared " +
                                     detail::verdict(expected),
                        c.allowed == expected));
  }
  return out;
}

// --- multipole ------------------------------------------------------------

/// Quadrupole-order phi1 exact for affine E1; dipole-order error shrinks
/// about fourfold when the domain is halved.
inline std::vector<Check> check_multipole(const ScenarioConfig& cfg) {
  if (!cfg.fields.has_dynamic_E()) throw InvalidInput("multipole check needs a time-dependent electric field");
  const TruncationReport rep = truncation_report(cfg.fields, cfg.R, cfg.grid, cfg.time, cfg.quadrature_order);
  const auto& quad = rep.row("quadrupole", "phi1");
  const auto& dip = rep.row("dipole", "phi1");
  return {
      at_most("C8", "quadrupole-order phi1 vs line integral", quad.max_error, cfg.tolerances.multipole_exact),
      within("C8", "dipole-order phi1 error shrink on halving (error " + detail::fmt(dip.max_error) + ")",
             dip.shrink_ratio, cfg.tolerances.multipole_ratio_min, cfg.tolerances.multipole_ratio_max),
  };
}

/// The four explicit multipolar terms have strictly decreasing largest
/// matrix elements over the stationary basis.
inline std::vector<Check> check_diamagnetic_ordering(const ScenarioConfig& cfg, const StationaryBasis& basis) {
  if (cfg.grid.dim() != 2) throw InvalidInput("diamagnetic ordering needs a 2D scenario");
  const double B0 = cfg.fields.B0(cfg.R);
  const double step = 0.25 * detail::hmax(cfg.grid);
  const MultipoleExpansion exp = make_multipole_expansion(cfg.fields, cfg.R, step, MultipoleOrder::quadrupole);
  const MultipolarTerms terms = multipolar_perturbation_terms(exp, B0, cfg.grid, cfg.constants, cfg.time);
  const double sizes[4] = {
      matrix_elements(terms.electric, basis).cwiseAbs().maxCoeff(),
      matrix_elements(terms.magnetic_dipole, basis).cwiseAbs().maxCoeff(),
      matrix_elements(terms.diamagnetic_cross, basis).cwiseAbs().maxCoeff(),
      matrix_elements(terms.diamagnetic_quadratic, basis).cwiseAbs().maxCoeff(),
  };
  return {holds("ORDER",
                "multipolar terms decrease: " + detail::fmt(sizes[0]) + " > " + detail::fmt(sizes[1]) + " > " +
                    detail::fmt(sizes[2]) + " > " + detail::fmt(sizes[3]),
                sizes[0] > sizes[1] && sizes[1] > sizes[2] && sizes[2] > sizes[3])};
}

// --- dynamics -------------------------------------------------------------

namespace detail {

inline const PropagationOptions& require_propagation(const ScenarioConfig& cfg) {
  if (!cfg.propagation) throw InvalidInput("this check needs a propagation block");
  return *cfg.propagation;
}

inline const TdptConfig& require_tdpt(const ScenarioConfig& cfg) {
  if (!cfg.tdpt) throw InvalidInput("this check needs a tdpt block");
  return *cfg.tdpt;
}

inline AmplitudeTrajectory run_tdpt(const ScenarioConfig& cfg, const FieldSpec& fields, const StationaryBasis& basis,
                                    std::size_t states) {
  const PropagationOptions& p = require_propagation(cfg);
  const PotentialSet pots0 = multipolar_potentials(fields.static_part(), cfg.R, cfg.quadrature_order);
  const PotentialSet pots1 = multipolar_potentials(fields.dynamic_part(), cfg.R, cfg.quadrature_order);
  TdptOptions opt;
  opt.t_final = p.t_final;
  opt.dt = p.dt;
  opt.stride = p.stride;
  opt.states = states;
  CVector a0 = CVector::Zero(static_cast<Eigen::Index>(states));
  a0[0] = 1.0;
  return integrate_tdpt(
      basis, [&](double t) { return build_V(pots1, pots0, zero_gauge(), cfg.grid, cfg.constants, t); }, a0,
      cfg.constants, opt);
}

inline double population_gap(const AmplitudeTrajectory& a, const AmplitudeTrajectory& b, std::size_t n) {
  double worst = 0.0;
  for (std::size_t s = 0; s < a.times.size(); ++s) worst = std::max(worst, std::abs(a.population(s, n) - b.population(s, n)));
  return worst;
}

}  // namespace detail

/// TDSE populations in every catalogued gauge against the reference gauge.
inline std::vector<Check> check_gauge_invariance(const ScenarioConfig& cfg) {
  detail::require_propagation(cfg);
  const GaugeComparison cmp = compare_gauges(cfg.scenario(), cfg.gauges);
  std::vector<Check> out;
  for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
    const auto& row = cmp.rows[i];
    out.push_back(at_most("C5",
                          row.label + " (" + detail::verdict(row.classification.allowed) + "): max ||a_n|^2 - |a_n|^2_0|",
                          row.max_deviation, cfg.tolerances.gauge_invariance));
  }
  return out;
}

struct TdptComparison {
  double strong = 0.0;
  double weak = 0.0;
  double truncated = 0.0;
};

/// TDPT against TDSE for |a_1|^2 at the configured drive and at the weak
/// drive, plus the two-state truncation at the configured drive.
inline TdptComparison compare_tdpt(const ScenarioConfig& cfg, const StationaryBasis& basis) {
  const TdptConfig& td = detail::require_tdpt(cfg);
  TdptComparison c;
  for (bool weak : {false, true}) {
    const FieldSpec fields = weak ? cfg.fields.with_dynamic_scaled(td.weak_drive_factor) : cfg.fields;
    Scenario sc = cfg.scenario();
    sc.fields = fields;
    const AmplitudeTrajectory tdse = run_in_gauge(sc, basis, zero_gauge());
    const AmplitudeTrajectory tdpt = detail::run_tdpt(cfg, fields, basis, td.states);
    (weak ? c.weak : c.strong) = detail::population_gap(tdpt, tdse, 1);
    if (!weak) c.truncated = detail::population_gap(detail::run_tdpt(cfg, fields, basis, 2), tdse, 1);
  }
  return c;
}

inline std::vector<Check> check_tdpt_consistency(const ScenarioConfig& cfg, const StationaryBasis& basis) {
  const TdptConfig& td = detail::require_tdpt(cfg);
  const TdptComparison c = compare_tdpt(cfg, basis);
  const double expected = 1.0 / (td.weak_drive_factor * td.weak_drive_factor);
  const double f = cfg.tolerances.tdpt_ratio_factor;
  return {
      at_most("C6", "TDPT vs TDSE max ||a_1|^2 gap| at the configured drive (recorded)", c.strong, 1.0),
      within("C6", "gap ratio configured/weak drive (expected " + detail::fmt(expected) + ", weak gap " +
                       detail::fmt(c.weak) + ")",
             c.strong / c.weak, expected / f, expected * f),
      holds("C6", "two-state gap " + detail::fmt(c.truncated) + " >= " + std::to_string(td.states) + "-state gap " +
                      detail::fmt(c.strong),
            c.truncated >= c.strong),
  };
}

/// Fitted Rabi frequency of the few-state TDPT run against
/// |<0| e (r-R).E1(R, 0) |1>| / hbar.
inline std::vector<Check> check_rabi(const ScenarioConfig& cfg, const StationaryBasis& basis) {
  const TdptConfig& td = detail::require_tdpt(cfg);
  if (basis.count() < 2) throw InvalidInput("Rabi check needs two basis states");
  const Vec2 E1 = cfg.fields.E1(cfg.R, 0.0);
  const ScalarSamples coupling =
      sample_scalar(cfg.grid, [&](Vec2 r) { return cfg.constants.e * dot(r - cfg.R, E1); });
  const double expected = std::abs(detail::weighted_element(basis, 0, 1, coupling)) / cfg.constants.hbar;
  const AmplitudeTrajectory traj = detail::run_tdpt(cfg, cfg.fields, basis, td.rabi_states);
  const RabiFit fit = fit_rabi_frequency(traj, 1, td.omega_max);
  return {at_most("C7",
                  "Rabi frequency fit " + detail::fmt(fit.omega) + " vs |e eps x01|/hbar = " + detail::fmt(expected) +
                      " (relative error)",
                  std::abs(fit.omega - expected) / expected, cfg.tolerances.rabi_relative)};
}

/// 1000 steps from an eigenstate of the static Hamiltonian: norm drift and
/// phase against -E_n t / hbar.
inline std::vector<Check> check_propagator(const ScenarioConfig& cfg, const StationaryBasis& basis) {
  PropagationOptions opt = detail::require_propagation(cfg);
  const std::size_t steps = 1000;
  opt.t_final = static_cast<double>(steps) * opt.dt;
  opt.stride = 1;
  const std::size_t n = cfg.state;
  if (n >= basis.count()) throw InvalidInput("propagator check state outside the basis");
  Wavefunction psi0 = basis.states[n];
  psi0.set_time(0.0);
  const auto snaps = propagate_tdse(psi0, detail::static_potentials(cfg), cfg.constants, opt);
  double drift = 0.0;
  double phase = 0.0;
  double overlap = 0.0;
  for (const auto& s : snaps) {
    drift = std::max(drift, std::abs(s.norm_squared() - 1.0));
    const complex z = inner_product(basis.states[n], s);
    overlap = std::max(overlap, std::abs(std::abs(z) - 1.0));
    phase = std::max(phase, std::abs(std::arg(z * std::polar(1.0, basis.energies[n] * s.time() / cfg.constants.hbar))));
  }
  return {
      at_most("C10", "norm drift over 1000 steps", drift, cfg.tolerances.norm_drift),
      at_most("C10", "eigenstate phase error over t in [0, " + detail::fmt(opt.t_final) + "]", phase,
              cfg.tolerances.phase),
      at_most("C10", "eigenstate overlap | |<n|Psi>| - 1 |", overlap, 1e-8),
  };
}

/// Forward 1000 steps under the full time-dependent Hamiltonian, then back
/// with the step negated.
inline std::vector<Check> check_time_reversal(const ScenarioConfig& cfg, const StationaryBasis& basis) {
  PropagationOptions opt = detail::require_propagation(cfg);
  opt.t_final = 1000.0 * opt.dt;
  opt.stride = 1000;
  const PotentialSet pots = multipolar_potentials(cfg.fields, cfg.R, cfg.quadrature_order);
  Wavefunction psi0 = basis.states.front();
  psi0.set_time(0.0);
  const auto forward = propagate_tdse(psi0, pots, cfg.constants, opt);
  PropagationOptions back = opt;
  back.dt = -opt.dt;
  back.t_final = 0.0;
  const auto backward = propagate_tdse(forward.back(), pots, cfg.constants, back);
  const double err = std::sqrt(Wavefunction(psi0.grid(), backward.back().values() - psi0.values()).norm_squared());
  return {at_most("REV", "time reversal ||Psi_back - Psi_0||", err, cfg.tolerances.time_reversal)};
}

// --- suites ---------------------------------------------------------------

namespace detail {

template <class F>
SuiteResult timed_suite(const std::string& name, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult r;
  r.name = name;
  body(r.checks);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline void append(std::vector<Check>& to, std::vector<Check> from) {
  to.insert(to.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
}

inline bool has_family(const ScenarioConfig& cfg, const std::string& name) {
  for (const auto& f : cfg.families) {
    if (f.family == name) return true;
  }
  return false;
}

}  // namespace detail

inline SuiteResult suite_field_reconstruction(const ScenarioConfig& cfg) {
  return detail::timed_suite("field_reconstruction", [&](std::vector<Check>& c) {
    if (detail::has_family(cfg, "uniform_static_b")) {
      // The closed form needs uniform B alone; use just that family.
      ScenarioConfig only_b = cfg;
      only_b.families.clear();
      only_b.fields = FieldSpec();
      for (const auto& f : cfg.families) {
        if (f.family == "uniform_static_b") {
          only_b.families.push_back(f);
          only_b.fields = only_b.fields + build_family(f, cfg.R);
        }
      }
      detail::append(c, check_uniform_b_potential(only_b));
    }
    detail::append(c, check_field_reconstruction(cfg));
    detail::append(c, check_gauge_conditions(cfg));
    if (cfg.fields.has_static_E()) detail::append(c, check_two_path(cfg));
    detail::append(c, check_maxwell(cfg));
  });
}

inline SuiteResult suite_gauge_laws(const ScenarioConfig& cfg) {
  return detail::timed_suite("gauge_laws", [&](std::vector<Check>& c) {
    const StationaryBasis basis = detail::config_basis(cfg);
    detail::append(c, check_operator_contracts(cfg, basis));
    detail::append(c, check_gauge_catalogue(cfg));
    detail::append(c, check_gauge_shift(cfg, basis));
    detail::append(c, check_v_invariance(cfg, basis));
    detail::append(c, check_temporal_gauge(cfg));
  });
}

inline SuiteResult suite_multipole(const ScenarioConfig& cfg) {
  return detail::timed_suite("multipole", [&](std::vector<Check>& c) {
    detail::append(c, check_multipole(cfg));
    if (cfg.grid.dim() == 2 && cfg.fields.is_magnetic()) {
      detail::append(c, check_diamagnetic_ordering(cfg, detail::config_basis(cfg)));
    }
  });
}

inline SuiteResult suite_dynamics(const ScenarioConfig& cfg) {
  return detail::timed_suite("dynamics", [&](std::vector<Check>& c) {
    const StationaryBasis basis = detail::config_basis(cfg);
    detail::append(c, check_propagator(cfg, basis));
    detail::append(c, check_time_reversal(cfg, basis));
    detail::append(c, check_gauge_invariance(cfg));
    if (cfg.tdpt) {
      detail::append(c, check_tdpt_consistency(cfg, basis));
      detail::append(c, check_rabi(cfg, basis));
    }
  });
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"field_reconstruction", "gauge_laws", "multipole", "dynamics"};
  return names;
}

/// Runs a suite by name; unknown names raise InvalidInput.
inline SuiteResult run_suite(const std::string& name, const ScenarioConfig& cfg) {
  if (name == "field_reconstruction") return suite_field_reconstruction(cfg);
  if (name == "gauge_laws") return suite_gauge_laws(cfg);
  if (name == "multipole") return suite_multipole(cfg);
  if (name == "dynamics") return suite_dynamics(cfg);
  throw InvalidInput("unknown suite '" + name + "'");
}

}  // namespace gaugelab
