#pragma once

// Measured quantities shared by the unit suites and the acceptance binary.

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pldg::test {

/// Largest c with all three ratios of the hammer equivalence in [1/c, c]
/// over `pairs` random matrices with entries in [-5, 5]:
///   (S(A)-S(B)):(A-B), phi_{|A^s|}(|A^s-B^s|), (phi_{|A^s|})^*(|S(A)-S(B)|)
/// each divided by |F(A)-F(B)|^2.
inline double hammer_constant(const ConstitutiveParams& law, int pairs = 10000) {
  double c = 1.0;
  for (int i = 0; i < pairs; ++i) {
    const Mat2 a = random_matrix(5.0), b = random_matrix(5.0);
    const double ff = (f_map(law, a) - f_map(law, b)).squaredNorm();
    if (!(ff > 1e-300)) continue;
    const double shift = sym(a).norm();
    const double r1 = ddot(stress(law, a) - stress(law, b), a - b) / ff;
    const double r2 = phi_shifted(law, shift, (sym(a) - sym(b)).norm()) / ff;
    const double r3 = phi_conjugate(law, shift, (stress(law, a) - stress(law, b)).norm()) / ff;
    for (double r : {r1, r2, r3}) c = std::max({c, r, 1.0 / r});
  }
  return c;
}

/// Largest relative error of the stress tangent against forward differences
/// with step 1e-6 over random unit A, B with |A^s| >= 0.1.
inline double tangent_fd_error(const ConstitutiveParams& law, int samples = 200) {
  double worst = 0.0;
  const double eps = 1e-6;
  for (int i = 0; i < samples; ++i) {
    Mat2 a = random_matrix();
    a /= a.norm();
    if (sym(a).norm() < 0.1) continue;
    Mat2 b = random_matrix();
    b /= b.norm();
    const Mat2 fd = (stress(law, a + eps * b) - stress(law, a)) / eps;
    const Mat2 an = apply(stress_tangent(law, a), b);
    worst = std::max(worst, (fd - an).norm() / std::max(an.norm(), 1e-12));
  }
  return worst;
}

/// Grid oracle for sup_t (s t - phi_a(t)): a coarse grid followed by
/// repeated zooming around the best grid point.
inline double conjugate_by_grid(const ConstitutiveParams& law, double a, double s) {
  double lo = 0.0, hi = 1.0;
  while (phi_shifted_prime(law, a, hi) < s) hi *= 2.0;
  double best = 0.0;
  for (int round = 0; round < 40; ++round) {
    const int n = 400;
    double arg = lo;
    best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
      const double t = lo + (hi - lo) * i / n;
      const double v = s * t - phi_shifted(law, a, t);
      if (v > best) {
        best = v;
        arg = t;
      }
    }
    const double width = (hi - lo) / n;
    lo = std::max(0.0, arg - width);
    hi = arg + width;
  }
  return best;
}

inline double conjugate_oracle_error(const ConstitutiveParams& law, int samples = 50) {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double a = uniform(0.0, 2.0), s = uniform(0.0, 5.0);
    worst = std::max(worst, std::abs(phi_conjugate(law, a, s) - conjugate_by_grid(law, a, s)));
  }
  return worst;
}

/// max |(R_h w, X) - <[[w (x) n]], {X}>| over random w, X.
inline double lifting_adjoint_defect(const Mesh& mesh, int degree, int trials = 20) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const BrokenField w = random_field(mesh, FieldShape::vector, degree);
    const BrokenField x = random_field(mesh, FieldShape::tensor, degree);
    const double lhs = inner_product(mesh, lifting(mesh, w), x);
    double rhs = 0.0;
    for (int f = 0; f < mesh.num_faces(); ++f) {
      const FaceTraceData jw = jump_and_average(mesh, w, f);
      const FaceTraceData ax = jump_and_average(mesh, x, f);
      for (std::size_t q = 0; q < jw.points.size(); ++q) rhs += jw.weights[q] * flatten(jw.jump(q)).dot(ax.average(q));
    }
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// max |(Div_h Pi_h v, z_h) + (v, grad z_h)| for smooth v vanishing on the
/// boundary and continuous random z_h.
inline double divergence_identity_defect(const Mesh& mesh, int degree, int fields = 10) {
  const ContinuousSpace space(mesh, degree);
  const QuadratureRule rule = triangle_rule(2 * degree + 10);
  const ReferenceBasis& basis = reference_basis(degree);
  double worst = 0.0;
  for (int n = 0; n < fields; ++n) {
    auto v = [n](const Vec2& x) { return bubble_field(n, x); };
    const BrokenField pv = l2_project(mesh, FieldShape::vector, degree, v, 2 * degree + 10);
    const BrokenField div = dg_divergence(mesh, pv);
    ContinuousField z{Eigen::VectorXd::Zero(space.size())};
    for (int i = 0; i < space.size(); ++i) z.coefficients(i) = uniform(-1.0, 1.0);
    double lhs = 0.0, rhs = 0.0;
    for (int k = 0; k < mesh.num_elements(); ++k) {
      const ElementMap map = element_map(mesh, k);
      const auto& dofs = space.element_dofs(k);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec2& xi = rule.points[q];
        const double w = rule.weights[q] * map.det;
        const Eigen::MatrixX2d g = map.physical_gradients(basis.gradients(xi));
        Vec2 grad_z = Vec2::Zero();
        for (std::size_t a = 0; a < dofs.size(); ++a) grad_z += z.coefficients(dofs[a]) * g.row(a).transpose();
        lhs += w * evaluate_scalar(div, k, xi) * evaluate(space, z, k, xi);
        rhs -= w * v(map.to_physical(xi)).dot(grad_z);
      }
    }
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// max |D_h^k Pi_h w| for the rigid rotation w = (x2, -x1) with w as datum.
inline double rotation_defect(const Mesh& mesh, int degree) {
  auto w = [](const Vec2& x) { return Vec2(x.y(), -x.x()); };
  const BrokenField pw = l2_project(mesh, FieldShape::vector, degree, w);
  return dg_sym_gradient(mesh, pw, w).coefficients().cwiseAbs().maxCoeff();
}

/// Largest ratio ||v||_{grad,p,h} / ||v||_{D,p,h} over random v_h.
inline double korn_constant(const Mesh& mesh, double p, int samples = 100) {
  double c = 0.0;
  for (int i = 0; i < samples; ++i) {
    const BrokenField v = random_field(mesh, FieldShape::vector, 1);
    c = std::max(c, dg_norm(mesh, v, {}, p, DGNormVariant::full) / dg_norm(mesh, v, {}, p, DGNormVariant::sym));
  }
  return c;
}

/// Largest ||w||_q / ||w||_{grad,p,h} over projected random smooth fields
/// vanishing on the boundary, perturbed at the level of the mesh size.
inline double embedding_constant(const Mesh& mesh, double p, double q, int samples = 30) {
  const QuadratureRule rule = triangle_rule(8);
  double c = 0.0;
  for (int i = 0; i < samples; ++i) {
    const int n = i % 10;
    const double amp = uniform(0.5, 2.0);
    BrokenField w = l2_project(mesh, FieldShape::vector, 1, [&](const Vec2& x) { return Vec2(amp * bubble_field(n, x)); });
    for (Eigen::Index j = 0; j < w.coefficients().size(); ++j) w.coefficients()(j) += 0.1 * mesh.h_max() * uniform(-1.0, 1.0);
    double s = 0.0;
    for (int k = 0; k < mesh.num_elements(); ++k) {
      const double det = element_map(mesh, k).det;
      for (std::size_t j = 0; j < rule.size(); ++j) s += rule.weights[j] * det * std::pow(evaluate_vector(w, k, rule.points[j]).norm(), q);
    }
    c = std::max(c, std::pow(s, 1.0 / q) / dg_norm(mesh, w, {}, p));
  }
  return c;
}

/// Discrete system for a manufactured benchmark case on `mesh`.
struct Benchmark {
  ManufacturedSolution exact;
  SystemParams params;
  ProblemData data;

  Benchmark(int case_id, double p, FlowMode mode = FlowMode::navier_stokes)
      : exact(ManufacturedSolution::benchmark(case_id, ConstitutiveParams(p, 1e-4), mode)) {
    params.law = exact.law();
    params.mode = mode;
    data.body_force = [this](const Vec2& x) { return exact.body_force(x); };
    data.boundary_velocity = [this](const Vec2& x) { return exact.velocity(x); };
  }
  Benchmark(const Benchmark&) = delete;
  Benchmark& operator=(const Benchmark&) = delete;
};

/// max |b_h(x, y, y)| over random x, y.
inline double bh_antisymmetry_defect(const DiscreteSystem& system, int trials = 10) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const BrokenField x = random_field(system.mesh(), FieldShape::vector, system.params().degree);
    const BrokenField y = random_field(system.mesh(), FieldShape::vector, system.params().degree);
    worst = std::max(worst, std::abs(system.trilinear_bh(x, y, y)));
  }
  return worst;
}

/// max_j |(Div L_h, z_j)| over the continuous pressure basis, with L_h the
/// DG gradient (including the boundary datum) of the solved velocity.
inline double divergence_constraint_defect(const DiscreteSystem& system, const Eigen::VectorXd& state) {
  const Eigen::VectorXd r = system.residual(state);
  const double lambda = system.multiplier(state);
  const Eigen::VectorXd c = basis_integrals(system.pressure_space());
  // The pressure rows are (tr L, z_j) + lambda (1, z_j).
  return (r.segment(system.velocity_size(), system.pressure_size()) - lambda * c).cwiseAbs().maxCoeff();
}

}  // namespace pldg::test
