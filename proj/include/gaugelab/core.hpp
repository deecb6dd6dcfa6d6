#pragma once

// Shared primitives: constants, uniform Cartesian grids, wavefunctions and
// finite-difference differential operators on sampled fields.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaugelab {

using complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Raised when a caller violates an operation's precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative method exhausts its budget. Carries the best
/// residuals reached so callers can report them.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> residuals = {})
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// In-plane vector. One-dimensional problems use the x component only.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
  friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
/// Out-of-plane component of a x b.
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
/// a x (B z-hat) for an in-plane a and an out-of-plane field of magnitude bz.
inline Vec2 cross_z(Vec2 a, double bz) { return {a.y * bz, -a.x * bz}; }

struct PhysicalConstants {
  double e = 1.0;
  double m = 1.0;
  double hbar = 1.0;
  double c = 137.036;

  void validate() const {
    if (!(m > 0.0) || !(hbar > 0.0) || !(c > 0.0)) {
      throw InvalidInput("physical constants require m > 0, hbar > 0, c > 0");
    }
    if (!std::isfinite(e)) throw InvalidInput("charge must be finite");
  }
};

struct Axis {
  double min = 0.0;
  double max = 1.0;
  std::size_t points = 8;

  double spacing() const { return (max - min) / static_cast<double>(points - 1); }
  double coordinate(std::size_t i) const {
    // Pin the last node so the extent is reproduced exactly.
    if (i + 1 == points) return max;
    return min + static_cast<double>(i) * spacing();
  }
  friend bool operator==(const Axis&, const Axis&) = default;
};

/// Uniform Cartesian grid in one or two dimensions. Node k has indices
/// (k % nx, k / nx).
class Grid {
 public:
  explicit Grid(Axis x) : dim_(1), axes_{x, Axis{0.0, 0.0, 1}} { validate_axis(x); }
  Grid(Axis x, Axis y) : dim_(2), axes_{x, y} {
    validate_axis(x);
    validate_axis(y);
  }

  int dim() const { return dim_; }
  const Axis& axis(int a) const { return axes_.at(static_cast<std::size_t>(a)); }
  std::size_t nx() const { return axes_[0].points; }
  std::size_t ny() const { return dim_ == 2 ? axes_[1].points : 1; }
  std::size_t size() const { return nx() * ny(); }
  double h(int a) const { return axis(a).spacing(); }
  double cell_volume() const { return dim_ == 1 ? h(0) : h(0) * h(1); }

  std::size_t index(std::size_t i, std::size_t j = 0) const { return i + nx() * j; }
  std::size_t ix(std::size_t k) const { return k % nx(); }
  std::size_t iy(std::size_t k) const { return k / nx(); }

  Vec2 node(std::size_t k) const {
    return {axes_[0].coordinate(ix(k)), dim_ == 2 ? axes_[1].coordinate(iy(k)) : 0.0};
  }

  bool is_boundary(std::size_t k) const {
    const std::size_t i = ix(k);
    if (i == 0 || i + 1 == nx()) return true;
    if (dim_ == 2) {
      const std::size_t j = iy(k);
      if (j == 0 || j + 1 == ny()) return true;
    }
    return false;
  }

  Vec2 center() const {
    return {0.5 * (axes_[0].min + axes_[0].max), dim_ == 2 ? 0.5 * (axes_[1].min + axes_[1].max) : 0.0};
  }

  /// Same node count, extents scaled by `factor` about `origin`.
  Grid scaled(double factor, Vec2 origin) const {
    auto scale_axis = [&](const Axis& a, double o) {
      return Axis{o + factor * (a.min - o), o + factor * (a.max - o), a.points};
    };
    if (dim_ == 1) return Grid(scale_axis(axes_[0], origin.x));
    return Grid(scale_axis(axes_[0], origin.x), scale_axis(axes_[1], origin.y));
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dim_ == b.dim_ && a.axes_[0] == b.axes_[0] && (a.dim_ == 1 || a.axes_[1] == b.axes_[1]);
  }

 private:
  static void validate_axis(const Axis& a) {
    if (a.points < 8) throw InvalidInput("grid axes need at least 8 points");
    if (!(a.max > a.min)) throw InvalidInput("grid axis requires max > min");
  }

  int dim_;
  std::array<Axis, 2> axes_;
};

/// Values of a scalar field at every grid node.
using ScalarSamples = RVector;

/// Values of an in-plane vector field at every grid node.
struct VectorSamples {
  RVector x;
  RVector y;
};

template <class F>
ScalarSamples sample_scalar(const Grid& grid, F&& f) {
  ScalarSamples out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) out[static_cast<Eigen::Index>(k)] = f(grid.node(k));
  return out;
}

template <class F>
VectorSamples sample_vector(const Grid& grid, F&& f) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  VectorSamples out{RVector(n), RVector(n)};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 v = f(grid.node(k));
    out.x[static_cast<Eigen::Index>(k)] = v.x;
    out.y[static_cast<Eigen::Index>(k)] = v.y;
  }
  return out;
}

class Wavefunction {
 public:
  Wavefunction(Grid grid, CVector values, double time = 0.0)
      : grid_(std::move(grid)), values_(std::move(values)), time_(time) {
    if (static_cast<std::size_t>(values_.size()) != grid_.size()) {
      throw InvalidInput("wavefunction size does not match its grid");
    }
  }

  template <class F>
  static Wavefunction from_function(const Grid& grid, F&& f, double time = 0.0) {
    CVector v(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      v[static_cast<Eigen::Index>(k)] = grid.is_boundary(k) ? complex{} : complex(f(grid.node(k)));
    }
    return Wavefunction(grid, std::move(v), time);
  }

  const Grid& grid() const { return grid_; }
  const CVector& values() const { return values_; }
  CVector& values() { return values_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  double norm_squared() const { return values_.squaredNorm() * grid_.cell_volume(); }

  Wavefunction normalized() const {
    const double n2 = norm_squared();
    if (!(n2 > 0.0) || !std::isfinite(n2)) throw InvalidInput("cannot normalize a zero or non-finite wavefunction");
    return Wavefunction(grid_, values_ / std::sqrt(n2), time_);
  }

 private:
  Grid grid_;
  CVector values_;
  double time_;
};

/// Discrete L2 inner product <a, b> = sum conj(a) b h^dim.
inline complex inner_product(const Wavefunction& a, const Wavefunction& b) {
  if (!(a.grid() == b.grid())) throw InvalidInput("inner_product: wavefunctions live on different grids");
  return a.values().dot(b.values()) * a.grid().cell_volume();
}

/// Partial derivative along axis `a`: central differences inside, one-sided
/// second-order stencils on the two edge nodes.
template <class Samples>
Samples partial(const Grid& grid, const Samples& f, int a) {
  Samples out = Samples::Zero(f.size());
  if (a >= grid.dim()) return out;
  const double h = grid.h(a);
  const std::size_t n = a == 0 ? grid.nx() : grid.ny();
  const std::size_t stride = a == 0 ? 1 : grid.nx();
  const std::size_t lines = grid.size() / n;
  for (std::size_t line = 0; line < lines; ++line) {
    const std::size_t base = a == 0 ? line * grid.nx() : line;
    auto at = [&](std::size_t i) { return f[static_cast<Eigen::Index>(base + i * stride)]; };
    auto put = [&](std::size_t i, auto v) { out[static_cast<Eigen::Index>(base + i * stride)] = v; };
    for (std::size_t i = 1; i + 1 < n; ++i) put(i, (at(i + 1) - at(i - 1)) / (2.0 * h));
    put(0, (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h));
    put(n - 1, (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h));
  }
  return out;
}

inline VectorSamples gradient(const Grid& grid, const ScalarSamples& f) {
  return {partial(grid, f, 0), partial(grid, f, 1)};
}

/// Gradient of each component of a vector field: {grad(v.x), grad(v.y)}.
inline std::array<VectorSamples, 2> gradient(const Grid& grid, const VectorSamples& v) {
  return {gradient(grid, v.x), gradient(grid, v.y)};
}

inline ScalarSamples divergence(const Grid& grid, const VectorSamples& v) {
  return partial(grid, v.x, 0) + partial(grid, v.y, 1);
}

/// Out-of-plane component of curl A on a 2D grid.
inline ScalarSamples curl2d(const Grid& grid, const VectorSamples& v) {
  if (grid.dim() != 2) throw InvalidInput("curl2d requires a 2D grid");
  return partial(grid, v.y, 0) - partial(grid, v.x, 1);
}

/// Max of |f| over interior nodes.
inline double max_interior_abs(const Grid& grid, const ScalarSamples& f) {
  double m = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid.is_boundary(k)) m = std::max(m, std::abs(f[static_cast<Eigen::Index>(k)]));
  }
  return m;
}

}  // namespace gaugelab
