#pragma once

#include "pldg/pldg.hpp"

#include <functional>
#include <random>

namespace pldg::test {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

inline Mat2 random_matrix(double scale = 1.0) {
  Mat2 a;
  a << uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale);
  return a;
}

inline Vec2 random_point() { return Vec2(uniform(-1.0, 1.0), uniform(-1.0, 1.0)); }

inline BrokenField random_field(const Mesh& mesh, FieldShape shape, int degree, double scale = 1.0) {
  BrokenField f(mesh, shape, degree);
  for (Eigen::Index i = 0; i < f.coefficients().size(); ++i) f.coefficients()(i) = uniform(-scale, scale);
  return f;
}

/// Luxembourg norm inf{l > 0 : rho(f / l) <= 1} by bisection in log scale,
/// given the modular as a function of the scaling 1/l.
inline double luxembourg_norm(const std::function<double(double)>& modular_of_inverse_scale) {
  double lo = 1e-8, hi = 1e8;
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (modular_of_inverse_scale(1.0 / mid) <= 1.0) hi = mid;
    else lo = mid;
  }
  return hi;
}

/// Smooth vector field vanishing on the boundary of (-1,1)^2, indexed by n.
inline Vec2 bubble_field(int n, const Vec2& x) {
  const double b = (1.0 - x.x() * x.x()) * (1.0 - x.y() * x.y());
  const double a = 0.3 + 0.1 * n;
  return b * Vec2(std::sin(a * x.x() + n) + x.y(), std::cos(a * x.y() - 0.5 * n) * x.x());
}

}  // namespace pldg::test
