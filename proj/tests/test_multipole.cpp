#include "gaugelab/multipole.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gaugelab;

namespace {

const Grid kGrid(Axis{-1.0, 1.0, 33}, Axis{-1.0, 1.0, 33});

}  // namespace

TEST(ExpandPhiTest, UniformDriveDipoleIsExact) {
  const auto f = dipole_drive({0.02, -0.01}, 1.3);
  const Vec2 R{0.2, 0.1};
  const auto exp = make_multipole_expansion(f, R, 1e-3, MultipoleOrder::dipole);
  for (std::size_t k = 0; k < kGrid.size(); k += 5) {
    const Vec2 r = kGrid.node(k);
    EXPECT_NEAR(expand_phi1(exp, r, 0.7), multipolar_phi(f, R, r, 0.7), 1e-15);
  }
}

TEST(ExpandPhiTest, GradientDriveQuadrupoleTerminates) {
  const auto f = gradient_drive(0.01, 0.5, 1.0);
  const Vec2 R{0.1, -0.3};
  const auto exp = make_multipole_expansion(f, R, 0.25 * kGrid.h(0));
  for (double t : {0.0, 0.3, 2.1}) {
    for (std::size_t k = 0; k < kGrid.size(); ++k) {
      const Vec2 r = kGrid.node(k);
      EXPECT_NEAR(expand_phi1(exp, r, t), multipolar_phi(f, R, r, t), 1e-12);
    }
  }
}

TEST(ExpandPhiTest, GradientDriveDipoleError) {
  const double eps = 0.01;
  const double alpha = 0.5;
  const double w = 1.0;
  const auto f = gradient_drive(eps, alpha, w);
  const auto exp = make_multipole_expansion(f, {}, 1e-3, MultipoleOrder::dipole);
  for (double t : {0.0, 0.4, 1.1}) {
    const Vec2 r{0.5, 0.0};
    // exact phi = -eps cos(wt) (x + alpha x^2/2); the dipole term drops the x^2 part.
    const double exact = -eps * std::cos(w * t) * (r.x + 0.5 * alpha * r.x * r.x);
    EXPECT_NEAR(multipolar_phi(f, {}, r, t), exact, 1e-15);
    EXPECT_NEAR(std::abs(expand_phi1(exp, r, t) - exact), std::abs(0.5 * eps * alpha * 0.25 * std::cos(w * t)), 1e-15);
  }
}

TEST(ExpandATest, UniformB1IsExactAndZeroIsZero) {
  const auto f = oscillating_uniform_b(0.3, 1.2, {0.1, 0.1});
  const Vec2 R{-0.2, 0.4};
  const auto exp = make_multipole_expansion(f, R, 1e-3);
  for (std::size_t k = 0; k < kGrid.size(); k += 3) {
    const Vec2 r = kGrid.node(k);
    const Vec2 a = expand_A1(exp, r, 0.9);
    const Vec2 b = multipolar_A(f, R, r, 0.9);
    EXPECT_NEAR(a.x, b.x, 1e-15);
    EXPECT_NEAR(a.y, b.y, 1e-15);
  }
  const auto none = make_multipole_expansion(dipole_drive({0.1, 0.0}, 1.0), R, 1e-3);
  EXPECT_EQ(norm(expand_A1(none, {0.5, 0.5}, 0.3)), 0.0);
}

TEST(ExpandATest, GradientBAsDriveLeavesBetaOverThree) {
  const double beta = 0.6;
  const FieldSpec f({}, {}, {}, [beta](Vec2 r, double) { return beta * r.x; });
  const auto exp = make_multipole_expansion(f, {}, 1e-3, MultipoleOrder::dipole);
  const Vec2 r{1.0, 0.0};
  const Vec2 exact = multipolar_A(f, {}, r, 0.0);
  EXPECT_NEAR(exact.y, beta / 3.0, 1e-15);
  EXPECT_NEAR(norm(exact - expand_A1(exp, r, 0.0)), beta / 3.0, 1e-15);
}

TEST(TruncationReportTest, UniformDriveAllExact) {
  const auto report = truncation_report(dipole_drive({0.02, 0.01}, 1.0) + oscillating_uniform_b(0.0, 1.0), {}, kGrid, 0.4);
  for (const auto& row : report.rows) EXPECT_LE(row.max_error, 1e-12) << row.order << " " << row.quantity;
}

TEST(TruncationReportTest, GradientDriveScaling) {
  const auto report = truncation_report(gradient_drive(0.01, 0.5, 1.0), {}, kGrid, 0.3);
  const auto& dip = report.row("dipole", "phi1");
  EXPECT_GT(dip.max_error, 1e-4);
  EXPECT_NEAR(dip.shrink_ratio, 4.0, 0.05);
  EXPECT_LE(report.row("quadrupole", "phi1").max_error, 1e-12);
  EXPECT_THROW(report.row("octupole", "phi1"), InvalidInput);
}

TEST(ExpandedPotentialsTest, ProvenanceAndValues) {
  const auto f = gradient_drive(0.01, 0.5, 1.0) + oscillating_uniform_b(0.2, 1.0);
  const auto exp = make_multipole_expansion(f, {0.1, 0.0}, 1e-3);
  const auto p = expanded_potentials(exp);
  EXPECT_EQ(p.provenance, Provenance::expanded);
  EXPECT_EQ(p.label, "expanded_quadrupole");
  const Vec2 r{0.4, -0.2};
  EXPECT_DOUBLE_EQ(p.phi(r, 0.5), expand_phi1(exp, r, 0.5));
  EXPECT_THROW(make_multipole_expansion(f, {}, 0.0), InvalidInput);
}
