#include "checks.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace pldg;
using pldg::test::random_field;

namespace {

Eigen::VectorXd random_state(const DiscreteSystem& s, double scale = 1.0) {
  Eigen::VectorXd x(s.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = test::uniform(-scale, scale);
  return x;
}

SystemParams params(double p, FlowMode mode) {
  SystemParams sp;
  sp.law = ConstitutiveParams(p, 1e-4);
  sp.mode = mode;
  return sp;
}

}  // namespace

TEST(DiscreteSystem, Dimensions) {
  const Mesh m = build_mesh(1);
  const DiscreteSystem s(m, params(2.5, FlowMode::navier_stokes), {});
  EXPECT_EQ(s.velocity_size(), 2 * 3 * m.num_elements());
  EXPECT_EQ(m.num_elements(), 128);
  EXPECT_EQ(s.pressure_size(), m.num_vertices());
  EXPECT_EQ(s.size(), s.velocity_size() + s.pressure_size() + 1);
  const Eigen::VectorXd x = random_state(s);
  const Eigen::VectorXd y = s.pack(s.velocity(x), s.pressure(x), s.multiplier(x));
  EXPECT_EQ((x - y).norm(), 0.0);
  EXPECT_THROW(s.residual(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST(DiscreteSystem, ZeroDataZeroStateGivesZeroResidual) {
  const Mesh m = build_mesh(1);
  SystemParams sp = params(2.0, FlowMode::navier_stokes);
  sp.law = ConstitutiveParams(2.0, 0.3);
  const DiscreteSystem s(m, sp, {});
  EXPECT_EQ(s.residual(s.zero_state()).norm(), 0.0);
}

TEST(DiscreteSystem, ModeDifferenceIsTheConvectiveForm) {
  const Mesh m = build_mesh(1);
  const DiscreteSystem ns(m, params(2.5, FlowMode::navier_stokes), {});
  const DiscreteSystem st(m, params(2.5, FlowMode::stokes), {});
  const Eigen::VectorXd x = random_state(ns);
  const Eigen::VectorXd d = ns.residual(x) - st.residual(x);
  EXPECT_LE(d.tail(ns.size() - ns.velocity_size()).norm(), 1e-12);
  const BrokenField v = ns.velocity(x);
  for (int t = 0; t < 5; ++t) {
    const BrokenField z = random_field(m, FieldShape::vector, 1);
    EXPECT_NEAR(d.head(ns.velocity_size()).dot(z.coefficients()), ns.trilinear_bh(v, v, z), 1e-12);
  }
}

TEST(DiscreteSystem, TangentMatchesFiniteDifferencesWithFrozenShifts) {
  const Mesh m = build_mesh(2);
  for (double p : {2.25, 2.5, 3.5})
    for (FlowMode mode : {FlowMode::navier_stokes, FlowMode::stokes}) {
      const test::Benchmark b(1, p, mode);
      const DiscreteSystem s(m, b.params, b.data);
      const Eigen::VectorXd x = random_state(s);
      const std::vector<double> shifts = s.face_shifts(x);
      const SparseMatrix j = s.tangent(x, shifts);
      const Eigen::VectorXd d = random_state(s);
      const double e = 1e-6;
      const Eigen::VectorXd fd = (s.residual(x + e * d, shifts) - s.residual(x - e * d, shifts)) / (2 * e);
      const Eigen::VectorXd jd = j * d;
      EXPECT_LE((fd - jd).norm() / jd.norm(), 1e-4) << p;
    }
}

TEST(DiscreteSystem, LinearStokesTangentIsStateIndependent) {
  const Mesh m = build_mesh(1);
  const DiscreteSystem s(m, params(2.0, FlowMode::stokes), {});
  const Eigen::MatrixXd a = Eigen::MatrixXd(s.tangent(random_state(s)));
  const Eigen::MatrixXd b = Eigen::MatrixXd(s.tangent(random_state(s)));
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DiscreteSystem, PressureBlocksAreTransposes) {
  const Mesh m = build_mesh(1);
  const test::Benchmark b(1, 2.75);
  const DiscreteSystem s(m, b.params, b.data);
  const Eigen::MatrixXd j = Eigen::MatrixXd(s.tangent(random_state(s)));
  const int nv = s.velocity_size(), np = s.pressure_size();
  const Eigen::MatrixXd bvq = j.block(0, nv, nv, np);
  const Eigen::MatrixXd bqv = j.block(nv, 0, np, nv);
  EXPECT_LE((bvq + bqv.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(bqv.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(DiscreteSystem, PressureCouplingEqualsDivergencePairing) {
  // (q_h I, D_h z) assembled equals (q_h, Div_h z) computed from the operator.
  const Mesh m = build_mesh(1);
  const DiscreteSystem s(m, params(2.5, FlowMode::stokes), {});
  const Eigen::MatrixXd j = Eigen::MatrixXd(s.tangent(s.zero_state()));
  const int nv = s.velocity_size(), np = s.pressure_size();
  const QuadratureRule rule = triangle_rule(4);
  for (int t = 0; t < 5; ++t) {
    ContinuousField q{Eigen::VectorXd::Random(np)};
    const BrokenField z = random_field(m, FieldShape::vector, 1);
    const double assembled = -z.coefficients().dot(j.block(0, nv, nv, np) * q.coefficients);
    const BrokenField div = dg_divergence(m, z);
    double direct = 0.0;
    for (int k = 0; k < m.num_elements(); ++k) {
      const double det = element_map(m, k).det;
      for (std::size_t i = 0; i < rule.size(); ++i)
        direct += rule.weights[i] * det * evaluate(s.pressure_space(), q, k, rule.points[i]) * evaluate_scalar(div, k, rule.points[i]);
    }
    EXPECT_NEAR(assembled, direct, 1e-11);
  }
}

TEST(DiscreteSystem, InfSupConstantStaysBounded) {
  // beta^2 = second smallest eigenvalue of B A^{-1} B^T against the pressure
  // mass matrix (the smallest belongs to constants), A the linear Stokes
  // velocity block.
  std::vector<double> beta;
  for (int level : {1, 2}) {
    const Mesh m = build_mesh(level);
    const DiscreteSystem s(m, params(2.0, FlowMode::stokes), {});
    const Eigen::MatrixXd j = Eigen::MatrixXd(s.tangent(s.zero_state()));
    const int nv = s.velocity_size(), np = s.pressure_size();
    const Eigen::MatrixXd a = j.topLeftCorner(nv, nv);
    const Eigen::MatrixXd bq = j.block(nv, 0, np, nv);
    Eigen::MatrixXd mq = Eigen::MatrixXd::Zero(np, np);
    const QuadratureRule rule = triangle_rule(4);
    const ReferenceBasis& basis = reference_basis(1);
    for (int k = 0; k < m.num_elements(); ++k) {
      const double det = element_map(m, k).det;
      const auto& dofs = s.pressure_space().element_dofs(k);
      for (std::size_t i = 0; i < rule.size(); ++i) {
        const Eigen::VectorXd phi = basis.values(rule.points[i]);
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) mq(dofs[r], dofs[c]) += rule.weights[i] * det * phi(r) * phi(c);
      }
    }
    const Eigen::MatrixXd schur = bq * a.llt().solve(bq.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(schur, mq);
    EXPECT_LT(es.eigenvalues()(0), 1e-10);
    beta.push_back(std::sqrt(es.eigenvalues()(1)));
  }
  EXPECT_GT(beta[0], 0.0);
  EXPECT_LE(std::abs(beta[1] - beta[0]) / beta[0], 0.5) << beta[0] << ' ' << beta[1];
}

TEST(DiscreteSystem, ProjectedExactSolutionIsConsistent) {
  const test::Benchmark b(2, 2.5);
  double prev = 0.0;
  for (int level = 1; level <= 3; ++level) {
    const Mesh m = build_mesh(level);
    const DiscreteSystem s(m, b.params, b.data);
    const BrokenField v = l2_project(m, FieldShape::vector, 1, [&](const Vec2& x) { return b.exact.velocity(x); }, 12);
    const ContinuousField q = interpolate(s.pressure_space(), [&](const Vec2& x) { return b.exact.pressure(x); });
    const double r = s.residual(s.pack(v, q)).head(s.velocity_size()).norm();
    if (level > 1) {
      EXPECT_LT(r, prev);
    }
    prev = r;
  }
}

TEST(ConvectiveForm, Antisymmetry) {
  const Mesh m = build_mesh(1);
  const DiscreteSystem s(m, params(2.5, FlowMode::navier_stokes), {});
  EXPECT_LE(test::bh_antisymmetry_defect(s), 1e-11);
  for (int t = 0; t < 5; ++t) {
    const BrokenField x = random_field(m, FieldShape::vector, 1);
    const BrokenField y = random_field(m, FieldShape::vector, 1);
    const BrokenField z = random_field(m, FieldShape::vector, 1);
    EXPECT_NEAR(s.trilinear_bh(x, y, z), -s.trilinear_bh(x, z, y), 1e-11);
    EXPECT_EQ(s.trilinear_bh(BrokenField(m, FieldShape::vector, 1), y, z), 0.0);
  }
}
