#include "gaugelab/operators.hpp"
#include "gaugelab/stationary.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gaugelab;

namespace {

const PhysicalConstants kUnits;
const Grid kLine(Axis{-8.0, 8.0, 256});

const PotentialSet& harmonic() {
  static const PotentialSet p = multipolar_potentials(linear_static_e(1.0), {});
  return p;
}

const StationaryBasis& harmonic_basis() {
  static const StationaryBasis b = solve_stationary(build_H0(harmonic(), zero_gauge(), kLine, kUnits), 6);
  return b;
}

DiscreteOperator multiply(const Grid& g, std::function<double(Vec2)> f) {
  PotentialSet p = zero_potentials();
  p.phi = [f](Vec2 r, double) { return f(r); };
  return build_V(p, zero_potentials(), zero_gauge(), g, kUnits, 0.0);
}

}  // namespace

TEST(SolveStationaryTest, HarmonicSpectrum) {
  const auto& b = harmonic_basis();
  ASSERT_EQ(b.count(), 6u);
  for (std::size_t n = 0; n < 4; ++n) EXPECT_NEAR(b.energies[n], n + 0.5, 1e-3) << "n = " << n;
  for (double r : b.residuals) EXPECT_LE(r, 1e-8);
  EXPECT_LE(orthonormality_defect(b), 1e-8);
  for (std::size_t n = 1; n < b.count(); ++n) EXPECT_GT(b.energies[n], b.energies[n - 1]);
}

TEST(SolveStationaryTest, NormalizationParityAndOrthogonality) {
  const auto& b = harmonic_basis();
  EXPECT_NEAR(std::abs(inner_product(b.states[0], b.states[0])), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(inner_product(b.states[0], b.states[1])), 0.0, 1e-10);
  // Direct summation of x |psi_0|^2 over the symmetric grid.
  double mean_x = 0.0;
  for (std::size_t k = 0; k < kLine.size(); ++k) {
    mean_x += kLine.node(k).x * std::norm(b.states[0].values()[static_cast<Eigen::Index>(k)]);
  }
  EXPECT_NEAR(mean_x * kLine.h(0), 0.0, 1e-10);
}

TEST(SolveStationaryTest, PhaseConventionIsDeterministic) {
  const auto& b = harmonic_basis();
  for (const auto& psi : b.states) {
    Eigen::Index arg = 0;
    psi.values().cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(psi.values()[arg].real(), 0.0);
    EXPECT_NEAR(psi.values()[arg].imag(), 0.0, 1e-14);
  }
}

TEST(SolveStationaryTest, ParticleInABox) {
  const Grid g(Axis{0.0, 1.0, 201});
  const auto b = solve_stationary(build_H0(zero_potentials(), zero_gauge(), g, kUnits), 5);
  const double h = g.h(0);
  // Independent oracle: the pentadiagonal Dirichlet matrix, dense.
  const Eigen::Index m = 199;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    T(i, i) = 1.25 / (h * h);
    if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = -2.0 / (3.0 * h * h);
    if (i + 2 < m) T(i, i + 2) = T(i + 2, i) = 1.0 / (24.0 * h * h);
  }
  // Odd continuation past each wall.
  T(0, 0) -= 1.0 / (24.0 * h * h);
  T(m - 1, m - 1) -= 1.0 / (24.0 * h * h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
  for (std::size_t n = 0; n < 5; ++n) {
    const double continuum = 0.5 * std::numbers::pi * std::numbers::pi * double((n + 1) * (n + 1));
    EXPECT_NEAR(b.energies[n], es.eigenvalues()[static_cast<Eigen::Index>(n)], 1e-9 * continuum);
    EXPECT_NEAR(b.energies[n], continuum, 1e-6 * continuum);
    EXPECT_NEAR(b.energies[n] / b.energies[0], double((n + 1) * (n + 1)), 1e-3 * (n + 1) * (n + 1));
  }
}

TEST(SolveStationaryTest, ConstantPotentialShiftsExactly) {
  PotentialSet shifted = harmonic();
  const double c = 0.37;
  shifted.phi = [c](Vec2 r, double) { return 0.5 * r.x * r.x + c; };
  const auto b = solve_stationary(build_H0(shifted, zero_gauge(), kLine, kUnits), 4);
  for (std::size_t n = 0; n < 4; ++n) EXPECT_NEAR(b.energies[n] - harmonic_basis().energies[n], c, 1e-10);
}

TEST(SolveStationaryTest, DenseAndIterativeAgreeIn2D) {
  const Grid g(Axis{-5.0, 5.0, 40}, Axis{-5.0, 5.0, 40});
  const auto pots = multipolar_potentials(linear_static_e(1.0) + uniform_static_b(0.5), {});
  const auto H = build_H0(pots, zero_gauge(), g, kUnits);
  EigenOptions iterative;
  iterative.dense_limit = 10;
  const auto dense = solve_stationary(H, 4);
  const auto iter = solve_stationary(H, 4, iterative);
  for (std::size_t n = 0; n < 4; ++n) {
    EXPECT_NEAR(dense.energies[n], iter.energies[n], 1e-9);
    EXPECT_LE(iter.residuals[n], 1e-8);
  }
  EXPECT_LE(orthonormality_defect(iter), 1e-8);
  // The ground state is nondegenerate, so the phase-fixed vectors coincide.
  EXPECT_NEAR(std::abs(inner_product(dense.states[0], iter.states[0])), 1.0, 1e-9);
}

TEST(SolveStationaryTest, RejectsBadRequests) {
  const auto H = build_H0(harmonic(), zero_gauge(), kLine, kUnits);
  EXPECT_THROW(solve_stationary(H, 0), InvalidInput);
  EXPECT_THROW(solve_stationary(H, 300), InvalidInput);
  EXPECT_THROW(solve_stationary(build_H0(harmonic(), product_xt_gauge(), kLine, kUnits, 1.0), 2), InvalidInput);
  EXPECT_THROW(matrix_element(H, harmonic_basis(), 0, 6), InvalidInput);
}

TEST(MatrixElementTest, IdentityAndPosition) {
  const auto& b = harmonic_basis();
  const auto I = multiply(kLine, [](Vec2) { return 2.5; });
  const auto M = matrix_elements(I, b);
  for (Eigen::Index m = 0; m < M.rows(); ++m) {
    for (Eigen::Index n = 0; n < M.cols(); ++n) EXPECT_NEAR(std::abs(M(m, n) - (m == n ? 2.5 : 0.0)), 0.0, 1e-12);
  }
  const auto X = multiply(kLine, [](Vec2 r) { return r.x; });
  EXPECT_NEAR(std::abs(matrix_element(X, b, 0, 1)), 1.0 / std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(std::abs(matrix_element(X, b, 0, 2)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(matrix_element(X, b, 1, 2)), 1.0, 1e-3);
}

TEST(GaugeShiftAuditTest, LinearTimeGaugeShiftsDiagonal) {
  const auto r = gauge_shift_audit(harmonic(), linear_time_gauge(0.7), harmonic_basis(), kUnits, {0.0, 0.5, 1.0, 2.0});
  for (double s : r.diagonal_shift) EXPECT_NEAR(s, -0.7, 1e-10);
  EXPECT_LE(r.diagonal_spread, 1e-10);
  EXPECT_LE(r.max_offdiagonal_change, 1e-10);
  EXPECT_TRUE(r.energy_interpretation_preserved);
  EXPECT_TRUE(r.allowed());
}

TEST(GaugeShiftAuditTest, SpatialGaugeLeavesElementsUnchanged) {
  const auto chi = polynomial_gauge(Polynomial2{{{2, 0, 1.0}, {4, 0, 0.01}}});
  const auto r = gauge_shift_audit(harmonic(), chi, harmonic_basis(), kUnits, {0.0, 1.0, 2.0});
  for (double s : r.diagonal_shift) EXPECT_NEAR(s, 0.0, 1e-8);
  EXPECT_LE(r.max_offdiagonal_change, 1e-8);
  EXPECT_TRUE(r.allowed());
}

TEST(GaugeShiftAuditTest, ProductGaugeCouplesStates) {
  const auto& b = harmonic_basis();
  const auto r = gauge_shift_audit(harmonic(), product_xt_gauge(), b, kUnits, {0.0, 0.5, 1.0, 2.0});
  // dH = -e x, so <0|dH|1> = -<0|x|1>, computed here by direct summation.
  complex x01 = 0.0;
  for (std::size_t k = 0; k < kLine.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    x01 += std::conj(b.states[0].values()[i]) * kLine.node(k).x * b.states[1].values()[i];
  }
  x01 *= kLine.h(0);
  for (std::size_t s = 0; s < r.times.size(); ++s) {
    const complex change = r.dressed[s](0, 1) - r.reference(0, 1);
    EXPECT_NEAR(std::abs(change + x01), 0.0, 1e-6);
  }
  EXPECT_NEAR(std::abs(x01), 1.0 / std::sqrt(2.0), 1e-3);
  EXPECT_TRUE(r.matches_prediction);
  EXPECT_FALSE(r.energy_interpretation_preserved);
  EXPECT_FALSE(r.allowed());
}

TEST(DressBasisTest, DressingIsUnitary) {
  const auto chi = polynomial_gauge(Polynomial2{{{2, 0, 1.0}}}) + product_xt_gauge();
  const auto d = dress_basis(harmonic_basis(), chi, 1.3, kUnits);
  EXPECT_LE(orthonormality_defect(d), 1e-12);
  EXPECT_EQ(d.energies, harmonic_basis().energies);
}
