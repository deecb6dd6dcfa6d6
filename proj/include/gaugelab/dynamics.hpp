#pragma once

// Time evolution of the full Schrodinger equation, projection of the
// evolving state onto gauge-dressed stationary states, and the coupled
// amplitude equations of perturbation theory in a truncated basis.

#include "gaugelab/stationary.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace gaugelab {

enum class PropagationMethod {
  /// exp(-i dt H(t + dt/2) / hbar) by a Lanczos exponential.
  exponential_midpoint,
  /// (1 + i dt H/2hbar) psi' = (1 - i dt H/2hbar) psi with H at the midpoint.
  crank_nicolson,
};

inline const char* to_string(PropagationMethod m) {
  return m == PropagationMethod::crank_nicolson ? "crank_nicolson" : "exponential_midpoint";
}

struct PropagationOptions {
  double t_final = 1.0;
  /// Negative steps run backwards in time.
  double dt = 1e-2;
  /// Keep every stride-th state; the initial and final states are always kept.
  std::size_t stride = 1;
  PropagationMethod method = PropagationMethod::exponential_midpoint;
  /// Bound on the Lanczos error estimate, relative to the state norm.
  double krylov_tolerance = 1e-13;
  int max_krylov = 60;
};

using HamiltonianBuilder = std::function<DiscreteOperator(double)>;

namespace detail {

/// exp(-i tau M) v with M Hermitian, by Lanczos with full
/// reorthogonalization. Returns false when the error estimate stays above
/// tol at the dimension cap.
inline bool lanczos_expm(const SparseMatrixC& M, const CVector& v, double tau, double tol, int max_dim, CVector& out) {
  const double beta0 = v.norm();
  if (beta0 == 0.0) {
    out = v;
    return true;
  }
  const Eigen::Index n = v.size();
  const int cap = static_cast<int>(std::min<Eigen::Index>(max_dim, n));
  Eigen::MatrixXcd V(n, cap + 1);
  std::vector<double> alpha;
  std::vector<double> beta;
  V.col(0) = v / beta0;
  for (int j = 0; j < cap; ++j) {
    CVector w = M * V.col(j);
    alpha.push_back(V.col(j).dot(w).real());
    w -= alpha.back() * V.col(j);
    if (j > 0) w -= beta.back() * V.col(j - 1);
    for (int i = 0; i <= j; ++i) w -= V.col(i).dot(w) * V.col(i);
    const double b = w.norm();
    const int m = j + 1;

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) T(i, i) = alpha[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::MatrixXd& Q = es.eigenvectors();
    CVector phase(m);
    for (int i = 0; i < m; ++i) phase[i] = std::polar(1.0, -tau * es.eigenvalues()[i]);
    const CVector y = Q.cast<complex>() * phase.cwiseProduct(Q.row(0).transpose().cast<complex>());

    const bool invariant = b <= 1e-14 * std::max(1.0, std::abs(alpha.back()));
    if (invariant || b * std::abs(y[m - 1]) <= tol) {
      out = beta0 * (V.leftCols(m) * y);
      return true;
    }
    beta.push_back(b);
    V.col(j + 1) = w / b;
  }
  return false;
}

/// Splits the step in halves until each Lanczos exponential converges.
inline CVector expm_step(const SparseMatrixC& M, const CVector& v, double tau, double tol, int max_dim, int depth = 0) {
  CVector out;
  if (lanczos_expm(M, v, tau, tol, max_dim, out)) return out;
  if (depth > 20) throw ConvergenceError("Lanczos exponential did not converge");
  const CVector half = expm_step(M, v, 0.5 * tau, tol, max_dim, depth + 1);
  return expm_step(M, half, 0.5 * tau, tol, max_dim, depth + 1);
}

inline CVector crank_nicolson_step(const SparseMatrixC& H, const CVector& v, double dt, double hbar) {
  using ColMajor = Eigen::SparseMatrix<complex>;
  const auto n = H.rows();
  ColMajor I(n, n);
  I.setIdentity();
  const complex k(0.0, dt / (2.0 * hbar));
  const ColMajor Hc = H;
  ColMajor lhs = I + k * Hc;
  const ColMajor rhs = I - k * Hc;
  lhs.makeCompressed();
  Eigen::SparseLU<ColMajor> lu;
  lu.compute(lhs);
  if (lu.info() != Eigen::Success) throw ConvergenceError("Crank-Nicolson factorization failed");
  CVector out = lu.solve(rhs * v);
  if (lu.info() != Eigen::Success) throw ConvergenceError("Crank-Nicolson solve failed");
  return out;
}

inline std::size_t step_count(double t0, const PropagationOptions& opt) {
  if (!(opt.dt != 0.0) || !std::isfinite(opt.dt)) throw InvalidInput("propagation needs a finite nonzero dt");
  if (opt.stride < 1) throw InvalidInput("snapshot stride must be at least 1");
  const double steps = (opt.t_final - t0) / opt.dt;
  const double rounded = std::round(steps);
  if (rounded < 0.0) throw InvalidInput("dt points away from t_final");
  if (std::abs(steps - rounded) > 1e-6 * std::max(1.0, rounded)) {
    throw InvalidInput("t_final - t0 must be a whole number of steps");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace detail

/// Evolves psi0 from psi0.time() to opt.t_final under H(t) supplied by the
/// builder, evaluated at each step midpoint.
inline std::vector<Wavefunction> propagate_tdse(const Wavefunction& psi0, const HamiltonianBuilder& hamiltonian,
                                                const PhysicalConstants& constants, const PropagationOptions& opt) {
  if (std::abs(psi0.norm_squared() - 1.0) > 1e-8) throw InvalidInput("propagate_tdse needs a normalized state");
  const double t0 = psi0.time();
  const std::size_t steps = detail::step_count(t0, opt);
  std::vector<Wavefunction> snapshots{psi0};
  CVector v = psi0.values();
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = t0 + static_cast<double>(s) * opt.dt;
    const DiscreteOperator H = hamiltonian(t + 0.5 * opt.dt);
    if (!(H.grid() == psi0.grid())) throw InvalidInput("Hamiltonian and state live on different grids");
    try {
      if (opt.method == PropagationMethod::crank_nicolson) {
        v = detail::crank_nicolson_step(H.matrix(), v, opt.dt, constants.hbar);
      } else {
        v = detail::expm_step(H.matrix(), v, opt.dt / constants.hbar, opt.krylov_tolerance, opt.max_krylov);
      }
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string(e.what()) + " at step " + std::to_string(s) + " (t = " + std::to_string(t) + ")");
    }
    if ((s + 1) % opt.stride == 0 || s + 1 == steps) {
      snapshots.emplace_back(psi0.grid(), v, t0 + static_cast<double>(s + 1) * opt.dt);
    }
  }
  return snapshots;
}

/// Convenience overload: H(t) = build_full_hamiltonian(pots, ..., t).
inline std::vector<Wavefunction> propagate_tdse(const Wavefunction& psi0, const PotentialSet& pots,
                                                const PhysicalConstants& constants, const PropagationOptions& opt) {
  const Grid grid = psi0.grid();
  return propagate_tdse(
      psi0, [&](double t) { return build_full_hamiltonian(pots, grid, constants, t); }, constants, opt);
}

enum class AmplitudeSource { projected_tdse, integrated_tdpt };

inline const char* to_string(AmplitudeSource s) {
  return s == AmplitudeSource::projected_tdse ? "projected_tdse" : "integrated_tdpt";
}

struct AmplitudeTrajectory {
  std::vector<double> times;
  std::vector<CVector> amplitudes;
  AmplitudeSource source = AmplitudeSource::projected_tdse;
  std::string gauge_label;

  std::size_t states() const { return amplitudes.empty() ? 0 : static_cast<std::size_t>(amplitudes.front().size()); }
  double population(std::size_t step, std::size_t n) const {
    return std::norm(amplitudes.at(step)[static_cast<Eigen::Index>(n)]);
  }
  std::vector<double> populations(std::size_t n) const {
    std::vector<double> p;
    for (std::size_t s = 0; s < times.size(); ++s) p.push_back(population(s, n));
    return p;
  }
};

/// a_n(t) = <psi_n exp(i e chi(t)/hbar), Psi(t)> exp(i E_n t / hbar).
inline AmplitudeTrajectory project_amplitudes(const std::vector<Wavefunction>& snapshots, const StationaryBasis& basis,
                                              const GaugeFunction& chi, const PhysicalConstants& constants) {
  AmplitudeTrajectory traj;
  traj.source = AmplitudeSource::projected_tdse;
  traj.gauge_label = chi.label;
  for (const auto& psi : snapshots) {
    if (!(psi.grid() == basis.grid())) throw InvalidInput("snapshot and basis live on different grids");
    const double t = psi.time();
    const StationaryBasis dressed = dress_basis(basis, chi, t, constants);
    CVector a(static_cast<Eigen::Index>(basis.count()));
    for (std::size_t n = 0; n < basis.count(); ++n) {
      a[static_cast<Eigen::Index>(n)] =
          inner_product(dressed.states[n], psi) * std::polar(1.0, basis.energies[n] * t / constants.hbar);
    }
    traj.times.push_back(t);
    traj.amplitudes.push_back(std::move(a));
  }
  return traj;
}

struct TdptOptions {
  double t0 = 0.0;
  double t_final = 1.0;
  double dt = 1e-2;
  std::size_t stride = 1;
  /// Number of basis states kept; 0 keeps the whole basis.
  std::size_t states = 0;
};

/// Classical fourth-order Runge-Kutta on
/// i hbar da_m/dt = sum_n a_n V_mn(t) exp(i (E_m - E_n) t / hbar),
/// with V_mn recomputed from the operator at every stage time.
inline AmplitudeTrajectory integrate_tdpt(const StationaryBasis& basis, const HamiltonianBuilder& perturbation,
                                          const CVector& a_init, const PhysicalConstants& constants,
                                          const TdptOptions& opt, const std::string& gauge_label = "zero") {
  const std::size_t count = opt.states == 0 ? basis.count() : opt.states;
  if (count < 2 || count > basis.count()) throw InvalidInput("TDPT needs between 2 and basis.count() states");
  if (static_cast<std::size_t>(a_init.size()) != count) throw InvalidInput("initial amplitudes have the wrong length");
  if (std::abs(a_init.squaredNorm() - 1.0) > 1e-10) throw InvalidInput("initial amplitudes must be normalized");
  PropagationOptions po;
  po.t_final = opt.t_final;
  po.dt = opt.dt;
  po.stride = opt.stride;
  const std::size_t steps = detail::step_count(opt.t0, po);
  const auto c = static_cast<Eigen::Index>(count);

  Eigen::VectorXd E(c);
  for (Eigen::Index i = 0; i < c; ++i) E[i] = basis.energies[static_cast<std::size_t>(i)];

  auto coupling = [&](double t) {
    const Eigen::MatrixXcd V = matrix_elements(perturbation(t), basis, count);
    Eigen::MatrixXcd K(c, c);
    for (Eigen::Index m = 0; m < c; ++m) {
      for (Eigen::Index n = 0; n < c; ++n) {
        K(m, n) = complex(0.0, -1.0 / constants.hbar) * V(m, n) * std::polar(1.0, (E[m] - E[n]) * t / constants.hbar);
      }
    }
    return K;
  };

  AmplitudeTrajectory traj;
  traj.source = AmplitudeSource::integrated_tdpt;
  traj.gauge_label = gauge_label;
  traj.times.push_back(opt.t0);
  traj.amplitudes.push_back(a_init);

  CVector a = a_init;
  Eigen::MatrixXcd K_start = coupling(opt.t0);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = opt.t0 + static_cast<double>(s) * opt.dt;
    const Eigen::MatrixXcd K_mid = coupling(t + 0.5 * opt.dt);
    const Eigen::MatrixXcd K_end = coupling(t + opt.dt);
    const CVector k1 = K_start * a;
    const CVector k2 = K_mid * (a + 0.5 * opt.dt * k1);
    const CVector k3 = K_mid * (a + 0.5 * opt.dt * k2);
    const CVector k4 = K_end * (a + opt.dt * k3);
    a += (opt.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    K_start = K_end;
    if ((s + 1) % opt.stride == 0 || s + 1 == steps) {
      traj.times.push_back(opt.t0 + static_cast<double>(s + 1) * opt.dt);
      traj.amplitudes.push_back(a);
    }
  }
  return traj;
}

/// max over shared samples of | |a_n|^2 - |b_n|^2 | for n below `states`
/// (0: all states common to both).
inline double max_population_difference(const AmplitudeTrajectory& a, const AmplitudeTrajectory& b,
                                        std::size_t states = 0) {
  if (a.times.size() != b.times.size()) throw InvalidInput("trajectories have different sample counts");
  const std::size_t n = states == 0 ? std::min(a.states(), b.states()) : states;
  if (n > a.states() || n > b.states()) throw InvalidInput("trajectories have too few states");
  double worst = 0.0;
  for (std::size_t s = 0; s < a.times.size(); ++s) {
    if (std::abs(a.times[s] - b.times[s]) > 1e-9 * std::max(1.0, std::abs(a.times[s]))) {
      throw InvalidInput("trajectories are sampled at different times");
    }
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(a.population(s, k) - b.population(s, k)));
  }
  return worst;
}

struct RabiFit {
  double omega = 0.0;
  double rms_residual = 0.0;
};

/// Least-squares fit of |a_n(t)|^2 to sin^2(Omega (t - t0) / 2) by a
/// coarse scan over Omega followed by golden-section refinement.
inline RabiFit fit_rabi_frequency(const AmplitudeTrajectory& traj, std::size_t n, double omega_max) {
  if (traj.times.size() < 3) throw InvalidInput("Rabi fit needs at least 3 samples");
  if (!(omega_max > 0.0)) throw InvalidInput("Rabi fit needs a positive search bound");
  const double t0 = traj.times.front();
  const std::vector<double> p = traj.populations(n);
  auto cost = [&](double omega) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double model = std::pow(std::sin(0.5 * omega * (traj.times[i] - t0)), 2);
      s += (model - p[i]) * (model - p[i]);
    }
    return s;
  };
  const int scan = 2000;
  double best = omega_max / scan;
  double best_cost = cost(best);
  for (int i = 2; i <= scan; ++i) {
    const double w = omega_max * i / scan;
    const double c = cost(w);
    if (c < best_cost) {
      best = w;
      best_cost = c;
    }
  }
  double lo = std::max(0.0, best - omega_max / scan);
  double hi = best + omega_max / scan;
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = cost(x1);
  double f2 = cost(x2);
  for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++i) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = cost(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = cost(x2);
    }
  }
  const double omega = 0.5 * (lo + hi);
  return {omega, std::sqrt(cost(omega) / static_cast<double>(p.size()))};
}

/// Everything needed to drive one system from its ground state.
struct Scenario {
  Grid grid;
  PhysicalConstants constants;
  FieldSpec fields;
  Vec2 R;
  int quad_order = 16;
  std::size_t basis_size = 6;
  PropagationOptions propagation;
  EigenOptions eigen;
};

struct GaugeComparisonRow {
  std::string label;
  double max_deviation = 0.0;
  GaugeClassification classification;
};

struct GaugeComparison {
  AmplitudeTrajectory reference;
  std::vector<AmplitudeTrajectory> trajectories;
  std::vector<GaugeComparisonRow> rows;

  double max_deviation() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.max_deviation);
    return m;
  }
};

/// Stationary basis of the static part of the scenario's fields, in the
/// multipolar gauge about R.
inline StationaryBasis scenario_basis(const Scenario& sc) {
  const PotentialSet pots0 = multipolar_potentials(sc.fields.static_part(), sc.R, sc.quad_order);
  return solve_stationary(build_H0(pots0, zero_gauge(), sc.grid, sc.constants), sc.basis_size, sc.eigen);
}

/// Full TDSE run from the ground state in the gauge chi, projected onto the
/// chi-dressed basis.
inline AmplitudeTrajectory run_in_gauge(const Scenario& sc, const StationaryBasis& basis, const GaugeFunction& chi) {
  const PotentialSet pots = apply_gauge_to_potentials(multipolar_potentials(sc.fields, sc.R, sc.quad_order), chi);
  Wavefunction psi0 = basis.states.front();
  psi0.set_time(0.0);
  psi0 = apply_gauge_to_wavefunction(psi0, chi, sc.constants);
  const auto snapshots = propagate_tdse(psi0, pots, sc.constants, sc.propagation);
  return project_amplitudes(snapshots, basis, chi, sc.constants);
}

/// Sample times used to classify gauge functions over a run.
inline std::vector<double> classification_times(double t_final, int count = 5) {
  std::vector<double> times;
  for (int i = 0; i < count; ++i) times.push_back(t_final * i / (count - 1));
  return times;
}

/// Runs the scenario in the multipolar reference gauge and in each chi,
/// reporting the largest population difference and the admissibility of chi.
inline GaugeComparison compare_gauges(const Scenario& sc, const std::vector<GaugeFunction>& chis) {
  const StationaryBasis basis = scenario_basis(sc);
  GaugeComparison out;
  out.reference = run_in_gauge(sc, basis, zero_gauge());
  const auto times = classification_times(sc.propagation.t_final);
  for (const auto& chi : chis) {
    AmplitudeTrajectory traj = run_in_gauge(sc, basis, chi);
    GaugeComparisonRow row;
    row.label = chi.label;
    row.max_deviation = max_population_difference(traj, out.reference);
    row.classification = validate_gauge_function(chi, sc.grid, times);
    out.rows.push_back(row);
    out.trajectories.push_back(std::move(traj));
  }
  return out;
}

}  // namespace gaugelab
