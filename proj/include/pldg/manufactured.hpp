#pragma once

#include "pldg/constitutive.hpp"
#include "pldg/mesh.hpp"
#include "pldg/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pldg {

enum class FlowMode { navier_stokes, stokes };

/// Which constant multiplies (p-2)/2 in the case-2 pressure exponent.
enum class ExponentBase { alpha, beta };

struct CaseParameters {
  double gamma = 0.0;
  double eta = 0.0;
};

/// Pressure exponent gamma and amplitude eta of the two benchmark cases:
///   case 1: gamma = 1 - 2/p' + 1e-4, eta = 25       (q just in W^{1,p'})
///   case 2: gamma = c (p-2)/2 + 1e-4, eta = 1000     (c = alpha or beta)
inline CaseParameters case_parameters(int case_id, const ConstitutiveParams& law, double alpha = 2.5,
                                      ExponentBase base = ExponentBase::beta, double beta = 1e-2) {
  if (!(law.p > 2.0)) throw std::invalid_argument("case_parameters: p > 2 required");
  switch (case_id) {
    case 1:
      return {1.0 - 2.0 / law.conjugate_exponent() + 1e-4, 25.0};
    case 2: {
      const double c = base == ExponentBase::alpha ? alpha : beta;
      return {c * (law.p - 2.0) / 2.0 + 1e-4, 1e3};
    }
    default:
      throw std::invalid_argument("case_parameters: case must be 1 or 2");
  }
}

/// Mean of |x|^gamma over (-1,1)^2. By symmetry it equals
/// 2/(gamma+2) int_0^{pi/4} sec(theta)^{gamma+2} dtheta, evaluated with an
/// n-point Gauss rule.
inline double mean_radial_power(double gamma, int points = 24) {
  if (!(gamma > -2.0)) throw std::invalid_argument("mean_radial_power: gamma must exceed -2");
  const EdgeRule rule = gauss_legendre(points);
  const double quarter = std::numbers::pi / 4.0;
  double s = 0.0;
  for (std::size_t i = 0; i < rule.points.size(); ++i)
    s += rule.weights[i] * std::pow(1.0 / std::cos(quarter * rule.points[i]), gamma + 2.0);
  return 2.0 / (gamma + 2.0) * quarter * s;
}

/// Exact solution v(x) = |x|^beta (x2, -x1), q(x) = eta (|x|^gamma - <|.|^gamma>)
/// on (-1,1)^2 and the matching body force.
class ManufacturedSolution {
 public:
  ManufacturedSolution(ConstitutiveParams law, FlowMode mode, double gamma, double eta, double beta = 1e-2)
      : law_(law), mode_(mode), beta_(beta), gamma_(gamma), eta_(eta), mean_offset_(mean_radial_power(gamma)) {}

  static ManufacturedSolution benchmark(int case_id, ConstitutiveParams law, FlowMode mode, double alpha = 2.5,
                                        ExponentBase base = ExponentBase::beta) {
    const CaseParameters c = case_parameters(case_id, law, alpha, base);
    return ManufacturedSolution(law, mode, c.gamma, c.eta);
  }

  const ConstitutiveParams& law() const { return law_; }
  FlowMode mode() const { return mode_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }
  double eta() const { return eta_; }
  double mean_offset() const { return mean_offset_; }

  Vec2 velocity(const Vec2& x) const { return std::pow(x.norm(), beta_) * Vec2(x.y(), -x.x()); }

  double pressure(const Vec2& x) const { return eta_ * (std::pow(x.norm(), gamma_) - mean_offset_); }

  /// Entry (i,j) = d_j v_i.
  Mat2 velocity_gradient(const Vec2& x) const {
    const double r2 = x.squaredNorm();
    const double rb = std::pow(r2, 0.5 * beta_);
    const double c = beta_ * rb / r2;
    Mat2 g;
    g << c * x.x() * x.y(), c * x.y() * x.y() + rb, -c * x.x() * x.x() - rb, -c * x.x() * x.y();
    return g;
  }

  Mat2 sym_gradient(const Vec2& x) const {
    const double r2 = x.squaredNorm();
    const double c = beta_ * std::pow(r2, 0.5 * beta_ - 1.0);
    Mat2 d;
    d << c * x.x() * x.y(), 0.5 * c * (x.y() * x.y() - x.x() * x.x()), 0.5 * c * (x.y() * x.y() - x.x() * x.x()),
        -c * x.x() * x.y();
    return d;
  }

  /// div S(Dv) in closed form. With s = (delta+|Dv|)^{p-2}, |Dv| = beta r^beta/sqrt2,
  /// div Dv = Lap v / 2 = beta(beta+2)/2 r^{beta-2} (x2,-x1) and
  /// Dv x = beta/2 r^beta (x2,-x1), one gets div(s Dv) = s div Dv + Dv grad s.
  Vec2 stress_divergence(const Vec2& x) const {
    const double r = x.norm();
    const double p = law_.p, delta = law_.delta, b = beta_;
    const double mod = b * std::pow(r, b) / std::numbers::sqrt2;
    const double s = std::pow(delta + mod, p - 2.0);
    const double ds = (p - 2.0) * std::pow(delta + mod, p - 3.0);
    const double coeff = s * 0.5 * b * (b + 2.0) * std::pow(r, b - 2.0) +
                         ds * (b * b / std::numbers::sqrt2) * std::pow(r, b - 2.0) * 0.5 * b * std::pow(r, b);
    return coeff * Vec2(x.y(), -x.x());
  }

  /// div S(Dv) by central differences of S(Dv(.)), step 1e-6 |x|.
  Vec2 stress_divergence_fd(const Vec2& x) const {
    const double step = 1e-6 * x.norm();
    Vec2 div = Vec2::Zero();
    for (int j = 0; j < 2; ++j) {
      Vec2 e = Vec2::Zero();
      e(j) = step;
      const Mat2 dS = (stress(law_, sym_gradient(x + e)) - stress(law_, sym_gradient(x - e))) / (2.0 * step);
      div += dS.col(j);
    }
    return div;
  }

  /// Convective term [grad v] v = -|x|^{2 beta} x.
  Vec2 convection(const Vec2& x) const { return -std::pow(x.squaredNorm(), beta_) * x; }

  Vec2 pressure_gradient(const Vec2& x) const {
    return eta_ * gamma_ * std::pow(x.squaredNorm(), 0.5 * gamma_ - 1.0) * x;
  }

  /// g = -div S(Dv) + [grad v] v + grad q (no convection in Stokes mode).
  Vec2 body_force(const Vec2& x) const {
    Vec2 g = -stress_divergence(x) + pressure_gradient(x);
    if (mode_ == FlowMode::navier_stokes) g += convection(x);
    return g;
  }

  Vec2 body_force_fd(const Vec2& x) const {
    Vec2 g = -stress_divergence_fd(x) + pressure_gradient(x);
    if (mode_ == FlowMode::navier_stokes) g += convection(x);
    return g;
  }

 private:
  ConstitutiveParams law_;
  FlowMode mode_;
  double beta_;
  double gamma_;
  double eta_;
  double mean_offset_;
};

}  // namespace pldg
