#pragma once

// Prescribed electromagnetic fields, split into static and time-dependent
// parts. Geometry is planar: E lies in the plane, B is the out-of-plane
// component B_z(x, y). One-dimensional problems use E_x only and require B = 0.

#include "gaugelab/core.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace gaugelab {

/// Name and parameters of an analytic field family.
struct FieldFamily {
  std::string name;
  std::map<std::string, double> params;
};

class FieldSpec {
 public:
  using StaticE = std::function<Vec2(Vec2)>;
  using DynamicE = std::function<Vec2(Vec2, double)>;
  using StaticB = std::function<double(Vec2)>;
  using DynamicB = std::function<double(Vec2, double)>;

  FieldSpec() = default;
  FieldSpec(StaticE e0, DynamicE e1, StaticB b0, DynamicB b1, std::vector<FieldFamily> families = {})
      : e0_(std::move(e0)), e1_(std::move(e1)), b0_(std::move(b0)), b1_(std::move(b1)),
        families_(std::move(families)) {}

  Vec2 E0(Vec2 r) const { return e0_ ? e0_(r) : Vec2{}; }
  Vec2 E1(Vec2 r, double t) const { return e1_ ? e1_(r, t) : Vec2{}; }
  double B0(Vec2 r) const { return b0_ ? b0_(r) : 0.0; }
  double B1(Vec2 r, double t) const { return b1_ ? b1_(r, t) : 0.0; }

  Vec2 E(Vec2 r, double t) const { return E0(r) + E1(r, t); }
  double B(Vec2 r, double t) const { return B0(r) + B1(r, t); }

  bool has_static_E() const { return static_cast<bool>(e0_); }
  bool has_dynamic_E() const { return static_cast<bool>(e1_); }
  bool has_static_B() const { return static_cast<bool>(b0_); }
  bool has_dynamic_B() const { return static_cast<bool>(b1_); }
  bool is_magnetic() const { return has_static_B() || has_dynamic_B(); }
  bool is_static() const { return !has_dynamic_E() && !has_dynamic_B(); }

  const std::vector<FieldFamily>& families() const { return families_; }

  FieldSpec static_part() const { return FieldSpec(e0_, {}, b0_, {}, families_); }
  FieldSpec dynamic_part() const { return FieldSpec({}, e1_, {}, b1_, families_); }

  /// Static part unchanged, time-dependent part multiplied by s.
  FieldSpec with_dynamic_scaled(double s) const {
    DynamicE e1;
    DynamicB b1;
    if (e1_) e1 = [f = e1_, s](Vec2 r, double t) { return s * f(r, t); };
    if (b1_) b1 = [f = b1_, s](Vec2 r, double t) { return s * f(r, t); };
    return FieldSpec(e0_, std::move(e1), b0_, std::move(b1), families_);
  }

  /// Superposition of two prescriptions.
  friend FieldSpec operator+(const FieldSpec& a, const FieldSpec& b) {
    auto families = a.families_;
    families.insert(families.end(), b.families_.begin(), b.families_.end());
    return FieldSpec(sum(a.e0_, b.e0_), sum(a.e1_, b.e1_), sum(a.b0_, b.b0_), sum(a.b1_, b.b1_),
                     std::move(families));
  }

 private:
  template <class F>
  static F sum(const F& f, const F& g) {
    if (!f) return g;
    if (!g) return f;
    return [f, g](auto... args) { return f(args...) + g(args...); };
  }

  StaticE e0_;
  DynamicE e1_;
  StaticB b0_;
  DynamicB b1_;
  std::vector<FieldFamily> families_;
};

// Built-in families. All are exact solutions of div B = 0 and
// curl E = -dB/dt.

inline FieldSpec uniform_static_e(Vec2 e0) {
  return FieldSpec([e0](Vec2) { return e0; }, {}, {}, {},
                   {{"uniform_static_e", {{"ex", e0.x}, {"ey", e0.y}}}});
}

/// Harmonic binding field E0 = -k (r - center).
inline FieldSpec linear_static_e(double k, Vec2 center = {}) {
  return FieldSpec([k, center](Vec2 r) { return -k * (r - center); }, {}, {}, {},
                   {{"linear_static_e", {{"k", k}, {"cx", center.x}, {"cy", center.y}}}});
}

inline FieldSpec uniform_static_b(double b0) {
  return FieldSpec({}, {}, [b0](Vec2) { return b0; }, {}, {{"uniform_static_b", {{"b", b0}}}});
}

/// B0 = beta x. Carries a uniform current density (curl B = -beta y-hat).
inline FieldSpec gradient_static_b(double beta) {
  return FieldSpec({}, {}, [beta](Vec2 r) { return beta * r.x; }, {}, {{"gradient_static_b", {{"beta", beta}}}});
}

/// Spatially uniform drive E1 = eps cos(omega t), B1 = 0.
inline FieldSpec dipole_drive(Vec2 eps, double omega) {
  return FieldSpec({}, [eps, omega](Vec2, double t) { return std::cos(omega * t) * eps; }, {}, {},
                   {{"dipole_drive", {{"ex", eps.x}, {"ey", eps.y}, {"omega", omega}}}});
}

/// E1 = eps (1 + alpha x) cos(omega t) x-hat. Its curl vanishes, so B1 = 0.
inline FieldSpec gradient_drive(double eps, double alpha, double omega) {
  return FieldSpec({}, [=](Vec2 r, double t) { return Vec2{eps * (1.0 + alpha * r.x) * std::cos(omega * t), 0.0}; },
                   {}, {}, {{"gradient_drive", {{"eps", eps}, {"alpha", alpha}, {"omega", omega}}}});
}

/// B1 = b1 cos(omega t) with the induced E1 = (omega b1 sin(omega t)/2) z-hat x (r - center).
inline FieldSpec oscillating_uniform_b(double b1, double omega, Vec2 center = {}) {
  return FieldSpec(
      {},
      [=](Vec2 r, double t) {
        const Vec2 d = r - center;
        return (0.5 * omega * b1 * std::sin(omega * t)) * Vec2{-d.y, d.x};
      },
      {}, [=](Vec2, double t) { return b1 * std::cos(omega * t); },
      {{"oscillating_uniform_b", {{"b", b1}, {"omega", omega}, {"cx", center.x}, {"cy", center.y}}}});
}

/// User-shaped time-dependent field with affine spatial profile:
/// E1 = (e + J r) cos(omega t + phase), B1 = (b + g . r) cos(omega t + phase).
/// Nothing ties E1 to B1 here; such fields must pass
/// check_maxwell_consistency before use.
inline FieldSpec affine_field(Vec2 e, std::array<double, 4> jacobian, double b, Vec2 grad_b, double omega,
                              double phase) {
  auto profile = [=](double t) { return std::cos(omega * t + phase); };
  FieldSpec::DynamicE e1 = [=](Vec2 r, double t) {
    const Vec2 v{e.x + jacobian[0] * r.x + jacobian[1] * r.y, e.y + jacobian[2] * r.x + jacobian[3] * r.y};
    return profile(t) * v;
  };
  FieldSpec::DynamicB b1;
  if (b != 0.0 || grad_b.x != 0.0 || grad_b.y != 0.0) {
    b1 = [=](Vec2 r, double t) { return profile(t) * (b + dot(grad_b, r)); };
  }
  return FieldSpec({}, std::move(e1), {}, std::move(b1),
                   {{"affine_field",
                     {{"ex", e.x}, {"ey", e.y}, {"jxx", jacobian[0]}, {"jxy", jacobian[1]}, {"jyx", jacobian[2]},
                      {"jyy", jacobian[3]}, {"b", b}, {"bx", grad_b.x}, {"by", grad_b.y}, {"omega", omega},
                      {"phase", phase}}}});
}

struct FieldValue {
  Vec2 E;
  double B = 0.0;
};

inline FieldValue eval_fields(const FieldSpec& spec, Vec2 r, double t) { return {spec.E(r, t), spec.B(r, t)}; }

struct MaxwellReport {
  /// max |div B|; identically zero for an out-of-plane B_z(x, y).
  double divergence_residual = 0.0;
  /// max over interior nodes and sampled times of |(curl E)_z + dB/dt|.
  double faraday_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Probes Faraday's law on the grid: spatial derivatives by the grid
/// stencils, dB/dt by a central difference of width 2*dt_probe. The
/// tolerance is coefficient * h^2 * (field scale) plus a rounding floor.
inline MaxwellReport check_maxwell_consistency(const FieldSpec& spec, const Grid& grid, const std::vector<double>& times,
                                               double coefficient = 10.0, double dt_probe = 1e-4) {
  MaxwellReport report;
  double scale = 0.0;
  const double hmax = grid.dim() == 2 ? std::max(grid.h(0), grid.h(1)) : grid.h(0);
  for (double t : times) {
    const VectorSamples E = sample_vector(grid, [&](Vec2 r) { return spec.E(r, t); });
    const ScalarSamples dBdt = sample_scalar(grid, [&](Vec2 r) {
      return (spec.B(r, t + dt_probe) - spec.B(r, t - dt_probe)) / (2.0 * dt_probe);
    });
    // A 1D grid has no y derivative: (curl E)_z reduces to dE_y/dx.
    const ScalarSamples curl = grid.dim() == 2 ? curl2d(grid, E) : ScalarSamples(partial(grid, E.y, 0));
    report.faraday_residual = std::max(report.faraday_residual, max_interior_abs(grid, curl + dBdt));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Vec2 r = grid.node(k);
      scale = std::max({scale, norm(spec.E(r, t)), std::abs(spec.B(r, t))});
    }
  }
  report.tolerance = coefficient * hmax * hmax * std::max(scale, 1e-300) + 1e-10 * std::max(scale, 1.0);
  report.pass = report.faraday_residual <= report.tolerance && report.divergence_residual <= report.tolerance;
  return report;
}

}  // namespace gaugelab
