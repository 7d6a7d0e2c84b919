#pragma once

#include "pldg/femspace.hpp"
#include "pldg/mesh.hpp"
#include "pldg/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <type_traits>

namespace pldg {

/// Exponent p and regularization delta of phi(t) = int_0^t (delta+s)^{p-2} s ds.
struct ConstitutiveParams {
  double p = 2.0;
  double delta = 1e-4;

  ConstitutiveParams() = default;
  ConstitutiveParams(double p_, double delta_) : p(p_), delta(delta_) {
    if (!(p > 1.0)) throw std::invalid_argument("ConstitutiveParams: p must exceed 1");
    if (!(delta >= 0.0)) throw std::invalid_argument("ConstitutiveParams: delta must be nonnegative");
  }

  /// Hoelder conjugate p' = p/(p-1).
  double conjugate_exponent() const { return p / (p - 1.0); }
};

namespace detail {

inline void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0)) throw std::domain_error(what);
}

// phi with regularization d: int_0^t (d+s)^{p-2} s ds.
inline double phi_regularized(double p, double d, double t) {
  if (t == 0.0) return 0.0;
  if (d == 0.0) return std::pow(t, p) / p;
  const double r = t / d;
  if (r < 1e-4) {
    // Taylor expansion avoids cancellation for t << d.
    return std::pow(d, p - 2.0) * t * t * (0.5 + (p - 2.0) * r / 3.0 + (p - 2.0) * (p - 3.0) * r * r / 8.0);
  }
  const double l = std::log1p(r);
  const double dp = std::pow(d, p);
  return dp * (std::expm1(p * l) / p - std::expm1((p - 1.0) * l) / (p - 1.0));
}

inline double phi_prime_regularized(double p, double d, double t) {
  if (t == 0.0) return 0.0;
  return std::pow(d + t, p - 2.0) * t;
}

inline double phi_second_regularized(double p, double d, double t) {
  // d/dt (d+t)^{p-2} t = (d+t)^{p-3} ((p-1) t + d)
  return std::pow(d + t, p - 3.0) * ((p - 1.0) * t + d);
}

}  // namespace detail

inline double phi(const ConstitutiveParams& law, double t) {
  detail::require_nonnegative(t, "phi: negative argument");
  return detail::phi_regularized(law.p, law.delta, t);
}

inline double phi_prime(const ConstitutiveParams& law, double t) {
  detail::require_nonnegative(t, "phi_prime: negative argument");
  return detail::phi_prime_regularized(law.p, law.delta, t);
}

/// Shifted N-function phi_a. Since phi_a'(t) = phi'(a+t) t/(a+t)
/// = (delta+a+t)^{p-2} t, it is phi with delta replaced by delta+a.
inline double phi_shifted(const ConstitutiveParams& law, double a, double t) {
  detail::require_nonnegative(a, "phi_shifted: negative shift");
  detail::require_nonnegative(t, "phi_shifted: negative argument");
  return detail::phi_regularized(law.p, law.delta + a, t);
}

inline double phi_shifted_prime(const ConstitutiveParams& law, double a, double t) {
  detail::require_nonnegative(a, "phi_shifted_prime: negative shift");
  detail::require_nonnegative(t, "phi_shifted_prime: negative argument");
  return detail::phi_prime_regularized(law.p, law.delta + a, t);
}

/// Complementary function (phi_a)^*(s) = sup_t (s t - phi_a(t)). The
/// maximizer solves phi_a'(t) = s; phi_a' is increasing, so a bracketed
/// Newton iteration with bisection fallback always converges.
inline double phi_conjugate(const ConstitutiveParams& law, double a, double s) {
  detail::require_nonnegative(a, "phi_conjugate: negative shift");
  detail::require_nonnegative(s, "phi_conjugate: negative argument");
  if (s == 0.0) return 0.0;
  const double p = law.p;
  const double d = law.delta + a;
  auto residual = [&](double t) { return detail::phi_prime_regularized(p, d, t) - s; };
  double lo = 0.0, hi = 1.0;
  while (residual(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("phi_conjugate: failed to bracket");
  }
  double t = 0.5 * (lo + hi);
  bool converged = false;
  for (int it = 0; it < 500; ++it) {
    const double r = residual(t);
    if (r > 0.0) hi = t; else lo = t;
    const double dr = detail::phi_second_regularized(p, d, t);
    double next = (dr > 0.0 && std::isfinite(dr)) ? t - r / dr : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * std::max(1.0, t) || hi - lo <= 1e-15 * hi) {
      t = next;
      converged = true;
      break;
    }
    t = next;
  }
  if (!converged || std::abs(residual(t)) > 1e-12 * std::max(1.0, s))
    throw std::runtime_error("phi_conjugate: root solve did not reach tolerance");
  return s * t - detail::phi_regularized(p, d, t);
}

inline Mat2 sym(const Mat2& a) { return 0.5 * (a + a.transpose()); }

/// Frobenius product A : B.
inline double ddot(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

namespace detail {

inline Mat2 power_law_map(double exponent, double d, const Mat2& a) {
  const Mat2 as = sym(a);
  const double n = as.norm();
  if (n == 0.0) return Mat2::Zero();
  return std::pow(d + n, exponent) * as;
}

// Row-major vec(B) -> vec(D S_d(A)[B]) for S_d(A) = (d+|A^s|)^{p-2} A^s.
inline Eigen::Matrix4d power_law_tangent(double p, double d, const Mat2& a) {
  Eigen::Matrix4d sym4 = Eigen::Matrix4d::Zero();
  sym4(0, 0) = 1.0;
  sym4(3, 3) = 1.0;
  sym4(1, 1) = sym4(1, 2) = sym4(2, 1) = sym4(2, 2) = 0.5;
  const Mat2 as = sym(a);
  const double n = as.norm();
  if (n == 0.0) return std::pow(d, p - 2.0) * sym4;
  const Eigen::Vector4d va = flatten(as);
  return (p - 2.0) * std::pow(d + n, p - 3.0) / n * va * va.transpose() + std::pow(d + n, p - 2.0) * sym4;
}

}  // namespace detail

/// Extra stress S(A) = (delta+|A^sym|)^{p-2} A^sym.
inline Mat2 stress(const ConstitutiveParams& law, const Mat2& a) {
  return detail::power_law_map(law.p - 2.0, law.delta, a);
}

/// Shifted stress S_a(A) = (delta+a+|A^sym|)^{p-2} A^sym.
inline Mat2 stress_shifted(const ConstitutiveParams& law, double a, const Mat2& m) {
  detail::require_nonnegative(a, "stress_shifted: negative shift");
  return detail::power_law_map(law.p - 2.0, law.delta + a, m);
}

/// F(A) = (delta+|A^sym|)^{(p-2)/2} A^sym.
inline Mat2 f_map(const ConstitutiveParams& law, const Mat2& a) {
  return detail::power_law_map(0.5 * (law.p - 2.0), law.delta, a);
}

/// Derivative of S at A as a 4x4 matrix acting on row-major vec(B):
/// (p-2)(delta+|A^s|)^{p-3} (A^s:B^s)/|A^s| A^s + (delta+|A^s|)^{p-2} B^s.
/// At A^s = 0 it is the limit delta^{p-2} B^s.
inline Eigen::Matrix4d stress_tangent(const ConstitutiveParams& law, const Mat2& a) {
  return detail::power_law_tangent(law.p, law.delta, a);
}

inline Eigen::Matrix4d stress_shifted_tangent(const ConstitutiveParams& law, double shift, const Mat2& a) {
  detail::require_nonnegative(shift, "stress_shifted_tangent: negative shift");
  return detail::power_law_tangent(law.p, law.delta + shift, a);
}

inline Mat2 apply(const Eigen::Matrix4d& tangent, const Mat2& b) {
  return unflatten_tensor(tangent * flatten(b));
}

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& v) { return v.norm(); }

}  // namespace detail

/// Cell modular rho_psi(f) = int_Omega psi(|f|) dx by quadrature.
/// `f(k, x)` returns the field on element k at physical point x (double,
/// Vec2 or Mat2); `psi(k, t)` or `psi(t)` evaluates the N-function, the
/// element index allowing a piecewise shift.
template <class Psi, class Field>
double modular_cells(const Mesh& mesh, Psi&& psi, Field&& f, int quad_degree = 8) {
  const QuadratureRule rule = triangle_rule(quad_degree);
  double s = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const ElementMap map = element_map(mesh, k);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double t = detail::magnitude(f(k, map.to_physical(rule.points[q])));
      double value;
      if constexpr (std::is_invocable_v<Psi, int, double>) value = psi(k, t);
      else value = psi(t);
      s += rule.weights[q] * map.det * value;
    }
  }
  return s;
}

/// Face modular rho_{psi,Gamma_h}(f) = sum over all faces of int psi(|f|) ds.
/// `f(face_id, x)` returns the face field; `psi(face_id, t)` or `psi(t)`.
template <class Psi, class Field>
double modular_faces(const Mesh& mesh, Psi&& psi, Field&& f, int quad_degree = 8) {
  const EdgeRule rule = edge_rule(quad_degree);
  double s = 0.0;
  for (int id = 0; id < mesh.num_faces(); ++id) {
    const FaceGeometry g = mesh.face_geometry(id);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double t = detail::magnitude(f(id, g.point(rule.points[q])));
      double value;
      if constexpr (std::is_invocable_v<Psi, int, double>) value = psi(id, t);
      else value = psi(t);
      s += rule.weights[q] * g.length * value;
    }
  }
  return s;
}

}  // namespace pldg
