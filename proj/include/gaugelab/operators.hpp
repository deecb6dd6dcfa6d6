#pragma once

// Discrete Hamiltonians on a Dirichlet grid. The kinetic term (p - eA)^2/2m
// uses edge phases exp(-i e/hbar * integral of A along the edge), so a gauge
// transformation of the potentials acts on the matrix exactly as
// H -> U H U^dagger - e d(chi)/dt with U = diag(exp(i e chi / hbar)).

#include "gaugelab/core.hpp"
#include "gaugelab/gauge.hpp"
#include "gaugelab/multipole.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace gaugelab {

using SparseMatrixC = Eigen::SparseMatrix<complex, Eigen::RowMajor>;

/// Linear operator on wavefunctions over one grid. Rows and columns of
/// boundary nodes are empty (homogeneous Dirichlet condition).
class DiscreteOperator {
 public:
  DiscreteOperator(Grid grid, SparseMatrixC matrix, bool hermitian, std::optional<double> time = std::nullopt)
      : grid_(std::move(grid)), matrix_(std::move(matrix)), hermitian_(hermitian), time_(time) {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    if (matrix_.rows() != n || matrix_.cols() != n) throw InvalidInput("operator matrix does not match its grid");
    matrix_.makeCompressed();
  }

  static DiscreteOperator zero(const Grid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    return DiscreteOperator(grid, SparseMatrixC(n, n), true);
  }

  const Grid& grid() const { return grid_; }
  const SparseMatrixC& matrix() const { return matrix_; }
  bool hermitian() const { return hermitian_; }
  std::optional<double> time() const { return time_; }

  CVector apply(const CVector& v) const { return matrix_ * v; }

  Wavefunction apply(const Wavefunction& psi) const {
    if (!(psi.grid() == grid_)) throw InvalidInput("operator applied to a wavefunction on another grid");
    return Wavefunction(grid_, matrix_ * psi.values(), psi.time());
  }

  friend DiscreteOperator operator+(const DiscreteOperator& a, const DiscreteOperator& b) {
    check_same_grid(a, b);
    return DiscreteOperator(a.grid_, a.matrix_ + b.matrix_, a.hermitian_ && b.hermitian_, a.time_ ? a.time_ : b.time_);
  }
  friend DiscreteOperator operator-(const DiscreteOperator& a, const DiscreteOperator& b) {
    check_same_grid(a, b);
    return DiscreteOperator(a.grid_, a.matrix_ - b.matrix_, a.hermitian_ && b.hermitian_, a.time_ ? a.time_ : b.time_);
  }
  friend DiscreteOperator operator*(double s, const DiscreteOperator& a) {
    return DiscreteOperator(a.grid_, SparseMatrixC(s * a.matrix_), a.hermitian_, a.time_);
  }

 private:
  static void check_same_grid(const DiscreteOperator& a, const DiscreteOperator& b) {
    if (!(a.grid_ == b.grid_)) throw InvalidInput("operators live on different grids");
  }

  Grid grid_;
  SparseMatrixC matrix_;
  bool hermitian_;
  std::optional<double> time_;
};

namespace detail {

/// Triplet collector restricted to interior nodes.
class Assembler {
 public:
  explicit Assembler(const Grid& grid) : grid_(grid) {}

  void add(std::size_t row, std::size_t col, complex v) {
    triplets_.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col), v);
  }

  /// Calls f(k, k_plus, axis) for every edge between two interior nodes.
  template <class F>
  void for_each_interior_edge(F&& f) const {
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      if (grid_.is_boundary(k)) continue;
      for (int a = 0; a < grid_.dim(); ++a) {
        const std::size_t next = k + (a == 0 ? 1 : grid_.nx());
        if (next < grid_.size() && !grid_.is_boundary(next)) f(k, next, a);
      }
    }
  }

  /// Calls f(k, far, axis) for every pair of interior nodes `step` cells apart along an axis.
  template <class F>
  void for_each_interior_pair(std::size_t step, F&& f) const {
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      if (grid_.is_boundary(k)) continue;
      for (int a = 0; a < grid_.dim(); ++a) {
        const std::size_t i = a == 0 ? grid_.ix(k) : grid_.iy(k);
        const std::size_t n = a == 0 ? grid_.nx() : grid_.ny();
        if (i + step >= n) continue;
        const std::size_t far = k + step * (a == 0 ? 1 : grid_.nx());
        if (!grid_.is_boundary(far)) f(k, far, a);
      }
    }
  }

  template <class F>
  void add_diagonal(F&& value_at) {
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      if (!grid_.is_boundary(k)) add(k, k, value_at(k));
    }
  }

  SparseMatrixC finish() {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    SparseMatrixC m(n, n);
    m.setFromTriplets(triplets_.begin(), triplets_.end());
    return m;
  }

 private:
  const Grid& grid_;
  std::vector<Eigen::Triplet<complex>> triplets_;
};

inline double hopping(const Grid& grid, int axis, const PhysicalConstants& c) {
  const double h = grid.h(axis);
  return c.hbar * c.hbar / (2.0 * c.m * h * h);
}

/// exp(-i e/hbar * integral of A from node k to node next).
inline complex edge_phase(const PotentialSet& pots, const Grid& grid, std::size_t k, std::size_t next, double t,
                          const PhysicalConstants& c) {
  if (!pots.magnetic) return 1.0;
  return std::polar(1.0, -(c.e / c.hbar) * pots.link_integral(grid.node(k), grid.node(next), t));
}

/// Fourth-order central stencil per axis,
/// -psi'' ~ (psi[-2] - 16 psi[-1] + 30 psi[0] - 16 psi[1] + psi[2]) / 12h^2,
/// each off-diagonal entry carrying the phase of its own straight link.
/// Past the wall psi is continued oddly (psi[-1] = -psi[1]), which keeps
/// the stencil fourth order on the rows next to the boundary.
inline void add_covariant_kinetic(Assembler& as, const Grid& grid, const PotentialSet& pots, double t,
                                  const PhysicalConstants& c) {
  as.add_diagonal([&](std::size_t k) {
    double diag = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
      const std::size_t i = a == 0 ? grid.ix(k) : grid.iy(k);
      const std::size_t n = a == 0 ? grid.nx() : grid.ny();
      diag += 2.5 * hopping(grid, a, c);
      if (i == 1) diag -= hopping(grid, a, c) / 12.0;
      if (i + 2 == n) diag -= hopping(grid, a, c) / 12.0;
    }
    return complex(diag);
  });
  for (const auto& [step, weight] : {std::pair<std::size_t, double>{1, -16.0 / 12.0}, {2, 1.0 / 12.0}}) {
    as.for_each_interior_pair(step, [&, weight = weight](std::size_t k, std::size_t far, int a) {
      const complex w = weight * hopping(grid, a, c) * edge_phase(pots, grid, k, far, t, c);
      as.add(k, far, w);
      as.add(far, k, std::conj(w));
    });
  }
}

/// Entry (k, next) of the covariant central difference -i hbar D_a; the
/// transposed entry is its conjugate.
inline complex covariant_momentum_entry(const PotentialSet& pots, const Grid& grid, std::size_t k, std::size_t next,
                                        int a, double t, const PhysicalConstants& c) {
  return complex(0.0, -c.hbar / (2.0 * grid.h(a))) * edge_phase(pots, grid, k, next, t, c);
}

}  // namespace detail

/// (p - eA)^2/2m + e phi at instant t, Dirichlet boundaries. Tagged with t.
inline DiscreteOperator build_full_hamiltonian(const PotentialSet& pots, const Grid& grid,
                                               const PhysicalConstants& constants, double t) {
  constants.validate();
  detail::Assembler as(grid);
  detail::add_covariant_kinetic(as, grid, pots, t, constants);
  as.add_diagonal([&](std::size_t k) { return complex(constants.e * pots.phi(grid.node(k), t)); });
  return DiscreteOperator(grid, as.finish(), true, t);
}

/// Unperturbed Hamiltonian with A0 + grad chi and phi0 - d(chi)/dt. Only a
/// general (not restricted) chi leaves a time tag on the result.
inline DiscreteOperator build_H0(const PotentialSet& pots0, const GaugeFunction& chi, const Grid& grid,
                                 const PhysicalConstants& constants, double t = 0.0) {
  const PotentialSet gauged = apply_gauge_to_potentials(pots0, chi);
  DiscreteOperator H = build_full_hamiltonian(gauged, grid, constants, t);
  if (chi.declared_form == GaugeForm::restricted) return DiscreteOperator(grid, H.matrix(), true);
  return H;
}

/// Perturbation e phi1 - (e/2m)(A1.Pi + Pi.A1) + e^2 A1^2/2m, where Pi is
/// the covariant central difference for A0 + grad chi. The symmetric
/// ordering equals -(e/m) A1.Pi + i e hbar (div A1)/2m.
inline DiscreteOperator build_V(const PotentialSet& pots1, const PotentialSet& pots0, const GaugeFunction& chi,
                                const Grid& grid, const PhysicalConstants& constants, double t) {
  constants.validate();
  const PotentialSet background = apply_gauge_to_potentials(pots0, chi);
  detail::Assembler as(grid);
  const double e = constants.e;
  const double m = constants.m;
  as.add_diagonal([&](std::size_t k) {
    const Vec2 r = grid.node(k);
    const Vec2 A1 = pots1.magnetic ? pots1.A(r, t) : Vec2{};
    return complex(e * pots1.phi(r, t) + e * e * dot(A1, A1) / (2.0 * m));
  });
  if (pots1.magnetic) {
    as.for_each_interior_edge([&](std::size_t k, std::size_t next, int a) {
      const Vec2 Ak = pots1.A(grid.node(k), t);
      const Vec2 An = pots1.A(grid.node(next), t);
      const double a_sum = a == 0 ? Ak.x + An.x : Ak.y + An.y;
      const complex pi = detail::covariant_momentum_entry(background, grid, k, next, a, t, constants);
      const complex w = -(e / (2.0 * m)) * a_sum * pi;
      as.add(k, next, w);
      as.add(next, k, std::conj(w));
    });
  }
  return DiscreteOperator(grid, as.finish(), true, t);
}

/// The four terms of the perturbation written out one by one:
/// e phi1, -(e/m) A1.Pi, e^2 A1^2/2m and i e hbar (div A1)/2m with div A1
/// from grid finite differences.
struct PerturbationTerms {
  DiscreteOperator electric;
  DiscreteOperator paramagnetic;
  DiscreteOperator diamagnetic;
  DiscreteOperator divergence;

  DiscreteOperator total() const { return electric + paramagnetic + diamagnetic + divergence; }
};

inline PerturbationTerms perturbation_terms(const PotentialSet& pots1, const PotentialSet& pots0,
                                            const GaugeFunction& chi, const Grid& grid,
                                            const PhysicalConstants& constants, double t) {
  const PotentialSet background = apply_gauge_to_potentials(pots0, chi);
  const double e = constants.e;
  const double m = constants.m;
  const VectorSamples A1 = sample_vector(grid, [&](Vec2 r) { return pots1.magnetic ? pots1.A(r, t) : Vec2{}; });
  const ScalarSamples divA1 = divergence(grid, A1);
  auto at = [](const RVector& v, std::size_t k) { return v[static_cast<Eigen::Index>(k)]; };

  detail::Assembler electric(grid);
  electric.add_diagonal([&](std::size_t k) { return complex(e * pots1.phi(grid.node(k), t)); });

  detail::Assembler para(grid);
  para.for_each_interior_edge([&](std::size_t k, std::size_t next, int a) {
    const complex pi = detail::covariant_momentum_entry(background, grid, k, next, a, t, constants);
    const RVector& comp = a == 0 ? A1.x : A1.y;
    para.add(k, next, -(e / m) * at(comp, k) * pi);
    para.add(next, k, -(e / m) * at(comp, next) * std::conj(pi));
  });

  detail::Assembler dia(grid);
  dia.add_diagonal([&](std::size_t k) {
    return complex(e * e * (at(A1.x, k) * at(A1.x, k) + at(A1.y, k) * at(A1.y, k)) / (2.0 * m));
  });

  detail::Assembler div(grid);
  div.add_diagonal([&](std::size_t k) { return complex(0.0, e * constants.hbar * at(divA1, k) / (2.0 * m)); });

  return {DiscreteOperator(grid, electric.finish(), true, t), DiscreteOperator(grid, para.finish(), false, t),
          DiscreteOperator(grid, dia.finish(), true, t), DiscreteOperator(grid, div.finish(), false, t)};
}

/// Terms of the explicit multipolar perturbation: electric multipole
/// e*phi1_expanded, magnetic dipole -(e/2m) l.B1, and the two diamagnetic
/// terms e^2 [(r-R) x B1].[(r-R) x B0]/4m and e^2 [(r-R) x B1]^2/8m,
/// with l = (r-R) x p.
struct MultipolarTerms {
  DiscreteOperator electric;
  DiscreteOperator magnetic_dipole;
  DiscreteOperator diamagnetic_cross;
  DiscreteOperator diamagnetic_quadratic;

  DiscreteOperator total() const { return electric + magnetic_dipole + diamagnetic_cross + diamagnetic_quadratic; }
};

inline MultipolarTerms multipolar_perturbation_terms(const MultipoleExpansion& exp, double B0, const Grid& grid,
                                                     const PhysicalConstants& constants, double t) {
  const double B1 = exp.B1_at_R(t);
  if (grid.dim() == 1 && (B1 != 0.0 || B0 != 0.0)) {
    throw InvalidInput("magnetic multipole terms need a 2D grid");
  }
  const double e = constants.e;
  const double m = constants.m;

  detail::Assembler electric(grid);
  electric.add_diagonal([&](std::size_t k) { return complex(e * expand_phi1(exp, grid.node(k), t)); });

  detail::Assembler mag(grid);
  if (B1 != 0.0) {
    // -(e/2m) B1 l_z with l_z = dx p_y - dy p_x, p = -i hbar (central difference).
    mag.for_each_interior_edge([&](std::size_t k, std::size_t next, int a) {
      const Vec2 d = grid.node(k) - exp.R;
      const complex p = complex(0.0, -constants.hbar / (2.0 * grid.h(a)));
      // Along x the lever arm is -dy, along y it is +dx; both are constant on the edge.
      const double lever = a == 0 ? -d.y : d.x;
      const complex w = -(e / (2.0 * m)) * B1 * lever * p;
      mag.add(k, next, w);
      mag.add(next, k, std::conj(w));
    });
  }

  detail::Assembler cross_term(grid);
  detail::Assembler quad_term(grid);
  cross_term.add_diagonal([&](std::size_t k) {
    const Vec2 d = grid.node(k) - exp.R;
    return complex(e * e * dot(cross_z(d, B1), cross_z(d, B0)) / (4.0 * m));
  });
  quad_term.add_diagonal([&](std::size_t k) {
    const Vec2 d = grid.node(k) - exp.R;
    const Vec2 c = cross_z(d, B1);
    return complex(e * e * dot(c, c) / (8.0 * m));
  });

  return {DiscreteOperator(grid, electric.finish(), true, t), DiscreteOperator(grid, mag.finish(), true, t),
          DiscreteOperator(grid, cross_term.finish(), true, t), DiscreteOperator(grid, quad_term.finish(), true, t)};
}

inline DiscreteOperator build_V0_multipolar(const MultipoleExpansion& exp, double B0, const Grid& grid,
                                            const PhysicalConstants& constants, double t) {
  return multipolar_perturbation_terms(exp, B0, grid, constants, t).total();
}

/// Random Dirichlet-compatible test vector normalized in the grid norm.
inline Wavefunction random_state(const Grid& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CVector v = CVector::Zero(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid.is_boundary(k)) v[static_cast<Eigen::Index>(k)] = complex(u(rng), u(rng));
  }
  return Wavefunction(grid, std::move(v)).normalized();
}

/// max over random normalized pairs of |<a, O b> - conj(<b, O a>)|.
inline double hermiticity_defect(const DiscreteOperator& op, int trials = 10, std::uint64_t seed = 12345) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Wavefunction a = random_state(op.grid(), rng);
    const Wavefunction b = random_state(op.grid(), rng);
    const complex ab = inner_product(a, op.apply(b));
    const complex ba = inner_product(b, op.apply(a));
    worst = std::max(worst, std::abs(ab - std::conj(ba)));
  }
  return worst;
}

}  // namespace gaugelab
