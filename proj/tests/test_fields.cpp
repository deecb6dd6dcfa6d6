#include "gaugelab/fields.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gaugelab;

namespace {

const Grid kGrid(Axis{-2.0, 2.0, 65}, Axis{-2.0, 2.0, 65});
const std::vector<double> kTimes{0.3, 0.9, 1.7};

}  // namespace

TEST(FieldFamilyTest, UniformStaticE) {
  const auto f = uniform_static_e({0.3, 0.0});
  for (double t : {0.0, 1.0, 7.5}) {
    const auto v = eval_fields(f, {1.2, -0.4}, t);
    EXPECT_DOUBLE_EQ(v.E.x, 0.3);
    EXPECT_DOUBLE_EQ(v.E.y, 0.0);
    EXPECT_DOUBLE_EQ(v.B, 0.0);
  }
  EXPECT_TRUE(f.is_static());
  EXPECT_FALSE(f.is_magnetic());
}

TEST(FieldFamilyTest, DipoleDrivePhase) {
  const auto f = dipole_drive({0.01, 0.0}, 1.0);
  EXPECT_DOUBLE_EQ(f.E1({5.0, 5.0}, 0.0).x, 0.01);
  EXPECT_NEAR(f.E1({5.0, 5.0}, std::numbers::pi / 2).x, 0.0, 1e-18);
  EXPECT_DOUBLE_EQ(f.B1({0.0, 0.0}, 0.3), 0.0);
}

TEST(FieldFamilyTest, OscillatingUniformBInducedField) {
  const auto f = oscillating_uniform_b(0.2, 2.0);
  const Vec2 E = f.E1({1.0, 0.0}, std::numbers::pi / 4);
  EXPECT_NEAR(E.x, 0.0, 1e-15);
  EXPECT_NEAR(E.y, 0.2, 1e-15);
  EXPECT_NEAR(f.B1({3.0, -1.0}, std::numbers::pi / 4), 0.2 * std::cos(std::numbers::pi / 2), 1e-15);
}

TEST(FieldFamilyTest, LinearAndGradientProfiles) {
  const auto lin = linear_static_e(2.0, {0.5, -0.5});
  EXPECT_DOUBLE_EQ(lin.E0({1.5, 0.5}).x, -2.0);
  EXPECT_DOUBLE_EQ(lin.E0({1.5, 0.5}).y, -2.0);
  EXPECT_DOUBLE_EQ(gradient_static_b(0.4).B0({2.0, 7.0}), 0.8);
  const auto gd = gradient_drive(0.01, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(gd.E1({2.0, 3.0}, 0.0).x, 0.02);
  EXPECT_FALSE(gd.has_dynamic_B());
}

TEST(FieldFamilyTest, SuperpositionAndScaling) {
  const auto f = linear_static_e(1.0) + dipole_drive({0.1, 0.2}, 1.0) + uniform_static_b(0.5);
  EXPECT_EQ(f.families().size(), 3u);
  const auto s = f.with_dynamic_scaled(0.1);
  EXPECT_DOUBLE_EQ(s.E0({1.0, 0.0}).x, -1.0);
  EXPECT_NEAR(s.E1({0.0, 0.0}, 0.0).y, 0.02, 1e-17);
  EXPECT_DOUBLE_EQ(s.B0({0.0, 0.0}), 0.5);
  EXPECT_TRUE(f.static_part().is_static());
  EXPECT_FALSE(f.dynamic_part().has_static_E());
}

TEST(MaxwellTest, BuiltInFamiliesPass) {
  const std::vector<FieldSpec> families = {uniform_static_e({0.3, 0.1}),      linear_static_e(1.0),
                                           uniform_static_b(0.7),             gradient_static_b(0.3),
                                           dipole_drive({0.01, 0.02}, 1.0),   gradient_drive(0.01, 0.5, 1.0),
                                           oscillating_uniform_b(0.2, 2.0)};
  for (const auto& f : families) {
    const auto r = check_maxwell_consistency(f, kGrid, kTimes);
    EXPECT_TRUE(r.pass) << f.families().front().name << " residual " << r.faraday_residual;
    EXPECT_EQ(r.divergence_residual, 0.0);
  }
}

TEST(MaxwellTest, StaticFamiliesHaveZeroResidual) {
  for (const auto& f : {uniform_static_e({0.3, 0.1}), linear_static_e(1.0), uniform_static_b(0.7), gradient_static_b(0.3)}) {
    EXPECT_LE(check_maxwell_consistency(f, kGrid, kTimes).faraday_residual, 1e-12);
  }
}

TEST(MaxwellTest, CurlWithoutMagneticFieldIsFlagged) {
  // E1 = (eps (1 + alpha y) sin(w t), 0) has (curl E)_z = -eps alpha sin(w t) and no B to balance it.
  const double eps = 0.05;
  const double alpha = 0.8;
  const double w = 1.3;
  const FieldSpec f({}, [=](Vec2 r, double t) { return Vec2{eps * (1.0 + alpha * r.y) * std::sin(w * t), 0.0}; }, {}, {});
  const auto r = check_maxwell_consistency(f, kGrid, kTimes);
  EXPECT_FALSE(r.pass);
  double expected = 0.0;
  for (double t : kTimes) expected = std::max(expected, std::abs(eps * alpha * std::sin(w * t)));
  EXPECT_NEAR(r.faraday_residual, expected, 1e-12);
}

TEST(MaxwellTest, AffineFieldWithMatchingB) {
  // E1 = (-y, x) cos t / 2 would need B1 = -sin t; an affine B1 = cos t does not balance it.
  const auto bad = affine_field({0.0, 0.0}, {0.0, -0.5, 0.5, 0.0}, 1.0, {0.0, 0.0}, 1.0, 0.0);
  EXPECT_FALSE(check_maxwell_consistency(bad, kGrid, kTimes).pass);
  // curl E1 = (jyx - jxy) cos(t) = 0 for a symmetric Jacobian and constant B: dB/dt must vanish too.
  const auto ok = affine_field({0.1, 0.0}, {0.2, 0.3, 0.3, -0.2}, 0.0, {0.0, 0.0}, 1.0, 0.4);
  EXPECT_TRUE(check_maxwell_consistency(ok, kGrid, kTimes).pass);
}
