#pragma once

// Lowest eigenpairs of a static Hamiltonian, matrix elements between them,
// and the audit of how a gauge function moves those matrix elements.

#include "gaugelab/operators.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace gaugelab {

struct StationaryBasis {
  std::vector<Wavefunction> states;
  std::vector<double> energies;
  /// ||H psi_n - E_n psi_n|| in the grid norm.
  std::vector<double> residuals;

  std::size_t count() const { return states.size(); }
  const Grid& grid() const {
    if (states.empty()) throw InvalidInput("empty stationary basis");
    return states.front().grid();
  }
};

struct EigenOptions {
  /// Interior node count up to which the dense solver is used.
  std::size_t dense_limit = 2048;
  double tolerance = 1e-9;
  int max_iterations = 500;
  std::uint64_t seed = 20240601;
};

namespace detail {

inline std::vector<std::size_t> interior_nodes(const Grid& grid) {
  std::vector<std::size_t> nodes;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid.is_boundary(k)) nodes.push_back(k);
  }
  return nodes;
}

/// Restriction of the operator to interior rows and columns.
inline Eigen::SparseMatrix<complex> interior_block(const SparseMatrixC& m, const std::vector<std::size_t>& nodes,
                                                    std::size_t grid_size) {
  std::vector<Eigen::Index> position(grid_size, -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) position[nodes[i]] = static_cast<Eigen::Index>(i);
  std::vector<Eigen::Triplet<complex>> triplets;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrixC::InnerIterator it(m, r); it; ++it) {
      const Eigen::Index pr = position[static_cast<std::size_t>(it.row())];
      const Eigen::Index pc = position[static_cast<std::size_t>(it.col())];
      if (pr >= 0 && pc >= 0) triplets.emplace_back(pr, pc, it.value());
    }
  }
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::SparseMatrix<complex> block(n, n);
  block.setFromTriplets(triplets.begin(), triplets.end());
  return block;
}

inline bool is_real(const Eigen::SparseMatrix<complex>& m) {
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    for (Eigen::SparseMatrix<complex>::InnerIterator it(m, c); it; ++it) {
      if (it.value().imag() != 0.0) return false;
    }
  }
  return true;
}

struct Eigenpairs {
  RVector values;
  Eigen::MatrixXcd vectors;
};

inline Eigenpairs dense_eigenpairs(const Eigen::SparseMatrix<complex>& block, std::size_t k) {
  const auto kk = static_cast<Eigen::Index>(k);
  if (is_real(block)) {
    const Eigen::MatrixXd dense = Eigen::MatrixXd(block.real());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
    return {solver.eigenvalues().head(kk), solver.eigenvectors().leftCols(kk).cast<complex>()};
  }
  const Eigen::MatrixXcd dense = Eigen::MatrixXcd(block);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense);
  if (solver.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
  return {solver.eigenvalues().head(kk), solver.eigenvectors().leftCols(kk)};
}

/// Lower bound on the spectrum from Gershgorin discs.
inline double gershgorin_lower_bound(const Eigen::SparseMatrix<complex>& m) {
  RVector centre = RVector::Zero(m.rows());
  RVector radius = RVector::Zero(m.rows());
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    for (Eigen::SparseMatrix<complex>::InnerIterator it(m, c); it; ++it) {
      if (it.row() == it.col()) {
        centre[it.row()] += it.value().real();
      } else {
        radius[it.row()] += std::abs(it.value());
      }
    }
  }
  return (centre - radius).minCoeff();
}

inline Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& x) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(x);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(x.rows(), x.cols());
}

/// Block subspace iteration with a shift-and-invert below the spectrum
/// and Rayleigh-Ritz extraction every sweep.
inline Eigenpairs iterative_eigenpairs(const Eigen::SparseMatrix<complex>& block, std::size_t k,
                                       const EigenOptions& opt) {
  const Eigen::Index n = block.rows();
  const auto kk = static_cast<Eigen::Index>(k);
  const Eigen::Index p = std::min<Eigen::Index>(n, kk + std::max<Eigen::Index>(kk, 8));

  const double lower = gershgorin_lower_bound(block);
  const double sigma = lower - 1e-2 * std::max(1.0, std::abs(lower));
  Eigen::SparseMatrix<complex> shifted = block;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
  shifted.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<complex>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) throw ConvergenceError("shift-invert factorization failed");

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd x(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = complex(gauss(rng), 0.0);
  }
  x = orthonormalize(x);

  std::vector<double> residuals(k, std::numeric_limits<double>::infinity());
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    Eigen::MatrixXcd y(n, p);
    for (Eigen::Index j = 0; j < p; ++j) y.col(j) = lu.solve(x.col(j));
    x = orthonormalize(y);
    const Eigen::MatrixXcd hx = block * x;
    Eigen::MatrixXcd g = x.adjoint() * hx;
    g = 0.5 * (g + g.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> rr(g);
    x = x * rr.eigenvectors();
    const Eigen::MatrixXcd r = hx * rr.eigenvectors() - x * rr.eigenvalues().asDiagonal();
    bool converged = true;
    for (std::size_t i = 0; i < k; ++i) {
      residuals[i] = r.col(static_cast<Eigen::Index>(i)).norm();
      converged = converged && residuals[i] <= opt.tolerance;
    }
    if (converged) return {rr.eigenvalues().head(kk), x.leftCols(kk)};
  }
  throw ConvergenceError("subspace iteration did not converge", residuals);
}

/// Largest-magnitude component made real and positive.
inline void fix_phase(CVector& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  const complex c = v[arg];
  if (std::abs(c) > 0.0) v *= std::conj(c) / std::abs(c);
}

}  // namespace detail

/// Lowest k eigenpairs of a Hermitian operator, restricted to interior
/// nodes. States are normalized in the grid norm and carry the
/// boundary zeros.
inline StationaryBasis solve_stationary(const DiscreteOperator& H0, std::size_t k, const EigenOptions& opt = {}) {
  if (!H0.hermitian()) throw InvalidInput("solve_stationary needs a Hermitian operator");
  if (H0.time()) throw InvalidInput("solve_stationary needs a time-independent operator");
  if (k < 1) throw InvalidInput("solve_stationary needs k >= 1");
  const Grid& grid = H0.grid();
  const auto nodes = detail::interior_nodes(grid);
  if (k > nodes.size()) throw InvalidInput("more eigenpairs requested than interior nodes");
  const auto block = detail::interior_block(H0.matrix(), nodes, grid.size());
  const detail::Eigenpairs pairs = nodes.size() <= opt.dense_limit ? detail::dense_eigenpairs(block, k)
                                                                     : detail::iterative_eigenpairs(block, k, opt);

  const double scale = 1.0 / std::sqrt(grid.cell_volume());
  StationaryBasis basis;
  for (std::size_t i = 0; i < k; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    CVector full = CVector::Zero(static_cast<Eigen::Index>(grid.size()));
    CVector local = pairs.vectors.col(col).normalized();
    detail::fix_phase(local);
    for (std::size_t j = 0; j < nodes.size(); ++j) full[static_cast<Eigen::Index>(nodes[j])] = local[static_cast<Eigen::Index>(j)] * scale;
    Wavefunction psi(grid, std::move(full));
    const double E = pairs.values[col];
    const CVector r = H0.apply(psi.values()) - E * psi.values();
    basis.residuals.push_back(r.norm() * std::sqrt(grid.cell_volume()));
    basis.energies.push_back(E);
    basis.states.push_back(std::move(psi));
  }
  return basis;
}

inline complex matrix_element(const DiscreteOperator& V, const StationaryBasis& basis, std::size_t m, std::size_t n) {
  if (m >= basis.count() || n >= basis.count()) throw InvalidInput("matrix_element index out of range");
  return inner_product(basis.states[m], V.apply(basis.states[n]));
}

/// All <m|V|n> for m, n below `count` (default: the whole basis).
inline Eigen::MatrixXcd matrix_elements(const DiscreteOperator& V, const StationaryBasis& basis,
                                        std::size_t count = 0) {
  if (count == 0) count = basis.count();
  if (count > basis.count()) throw InvalidInput("matrix_elements count exceeds the basis");
  const auto c = static_cast<Eigen::Index>(count);
  Eigen::MatrixXcd out(c, c);
  for (std::size_t n = 0; n < count; ++n) {
    const Wavefunction vn = V.apply(basis.states[n]);
    for (std::size_t m = 0; m < count; ++m) {
      out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = inner_product(basis.states[m], vn);
    }
  }
  return out;
}

/// Basis states dressed with the gauge phase exp(i e chi(r, t)/hbar).
inline StationaryBasis dress_basis(const StationaryBasis& basis, const GaugeFunction& chi, double t,
                                   const PhysicalConstants& constants) {
  StationaryBasis out = basis;
  for (auto& psi : out.states) {
    psi.set_time(t);
    psi = apply_gauge_to_wavefunction(psi, chi, constants);
  }
  return out;
}

/// Largest |<m|O|n> - delta_mn| style defect: max |<m|n> - delta_mn|.
inline double orthonormality_defect(const StationaryBasis& basis) {
  double worst = 0.0;
  for (std::size_t m = 0; m < basis.count(); ++m) {
    for (std::size_t n = 0; n < basis.count(); ++n) {
      const complex ip = inner_product(basis.states[m], basis.states[n]);
      worst = std::max(worst, std::abs(ip - (m == n ? 1.0 : 0.0)));
    }
  }
  return worst;
}

struct GaugeShiftReport {
  std::vector<double> times;
  /// <m_0|H_0|n_0>.
  Eigen::MatrixXcd reference;
  /// <m_chi|H_chi|n_chi> at each sampled time.
  std::vector<Eigen::MatrixXcd> dressed;
  /// -e <psi_m| d(chi)/dt |psi_n> at each sampled time.
  std::vector<Eigen::MatrixXcd> predicted;

  /// Diagonal shift of each state at the first sampled time.
  std::vector<double> diagonal_shift;
  /// max over times and states of |shift_n(t) - shift_0(t0)|.
  double diagonal_spread = 0.0;
  /// max over times and m != n of |dressed - reference|.
  double max_offdiagonal_change = 0.0;
  /// max over times of |dressed(t) - dressed(t0)|.
  double max_time_drift = 0.0;
  /// max over times of |(dressed - reference) - predicted|.
  double prediction_mismatch = 0.0;

  double tolerance = 0.0;
  bool matches_prediction = false;
  /// Uniform time-independent diagonal shift and unchanged off-diagonals.
  bool energy_interpretation_preserved = false;
  GaugeClassification classification;

  bool allowed() const { return classification.allowed; }
};

/// Matrix elements of H0_chi between gauge-dressed states, compared with
/// the reference elements and with the predicted -e <m|d(chi)/dt|n>.
inline GaugeShiftReport gauge_shift_audit(const PotentialSet& pots0, const GaugeFunction& chi,
                                          const StationaryBasis& basis, const PhysicalConstants& constants,
                                          const std::vector<double>& times, double tolerance = 1e-9) {
  if (times.empty()) throw InvalidInput("gauge_shift_audit needs at least one time");
  const Grid& grid = basis.grid();
  GaugeShiftReport report;
  report.times = times;
  report.tolerance = tolerance;
  report.reference = matrix_elements(build_H0(pots0, zero_gauge(), grid, constants, times.front()), basis);
  const auto n = report.reference.rows();

  for (double t : times) {
    const DiscreteOperator H = build_full_hamiltonian(apply_gauge_to_potentials(pots0, chi), grid, constants, t);
    report.dressed.push_back(matrix_elements(H, dress_basis(basis, chi, t, constants)));
    Eigen::MatrixXcd pred(n, n);
    const CVector rate = sample_scalar(grid, [&](Vec2 r) { return chi.rate(r, t); }).cast<complex>();
    for (Eigen::Index c = 0; c < n; ++c) {
      const Wavefunction weighted(grid, rate.cwiseProduct(basis.states[static_cast<std::size_t>(c)].values()));
      for (Eigen::Index r = 0; r < n; ++r) {
        pred(r, c) = -constants.e * inner_product(basis.states[static_cast<std::size_t>(r)], weighted);
      }
    }
    report.predicted.push_back(pred);
  }

  const Eigen::MatrixXcd first_delta = report.dressed.front() - report.reference;
  for (Eigen::Index i = 0; i < n; ++i) report.diagonal_shift.push_back(first_delta(i, i).real());
  for (std::size_t s = 0; s < times.size(); ++s) {
    const Eigen::MatrixXcd delta = report.dressed[s] - report.reference;
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        if (r == c) {
          report.diagonal_spread = std::max(report.diagonal_spread, std::abs(delta(r, c) - first_delta(0, 0)));
        } else {
          report.max_offdiagonal_change = std::max(report.max_offdiagonal_change, std::abs(delta(r, c)));
        }
      }
    }
    report.max_time_drift =
        std::max(report.max_time_drift, (report.dressed[s] - report.dressed.front()).cwiseAbs().maxCoeff());
    report.prediction_mismatch =
        std::max(report.prediction_mismatch, (delta - report.predicted[s]).cwiseAbs().maxCoeff());
  }
  report.matches_prediction = report.prediction_mismatch <= tolerance;
  report.energy_interpretation_preserved = report.diagonal_spread <= tolerance &&
                                           report.max_offdiagonal_change <= tolerance &&
                                           report.max_time_drift <= tolerance;
  if (times.size() >= 3) {
    report.classification = validate_gauge_function(chi, grid, times);
  } else {
    report.classification.allowed = report.energy_interpretation_preserved;
  }
  return report;
}

}  // namespace gaugelab
