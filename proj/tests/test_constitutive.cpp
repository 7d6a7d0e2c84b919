#include "checks.hpp"

#include <gtest/gtest.h>

using namespace pldg;
using pldg::test::random_matrix;
using pldg::test::uniform;

namespace {
const double kExperimentP[] = {2.25, 2.5, 2.75, 3.0, 3.25, 3.5};
}

TEST(Phi, QuadraticCase) {
  const ConstitutiveParams law(2.0, 0.0);
  for (double t : {0.0, 1.0, 2.0}) EXPECT_NEAR(phi(law, t), t * t / 2.0, 1e-14);
}

TEST(Phi, CubicCase) { EXPECT_NEAR(phi(ConstitutiveParams(3.0, 0.0), 2.0), 8.0 / 3.0, 1e-14); }

TEST(Phi, DerivativeFormula) {
  EXPECT_NEAR(phi_prime(ConstitutiveParams(2.5, 1e-4), 1.0), std::sqrt(1.0001), 1e-14);
}

TEST(Phi, MatchesQuadratureOfItsDerivative) {
  const EdgeRule r = gauss_legendre(30);
  for (double p : {1.5, 2.25, 3.5}) {
    const ConstitutiveParams law(p, 0.3);
    for (double t : {1e-6, 0.01, 0.7, 5.0}) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.points.size(); ++i) s += t * r.weights[i] * phi_prime(law, t * r.points[i]);
      EXPECT_NEAR(phi(law, t), s, 1e-12 * std::max(1.0, s));
    }
  }
}

TEST(Phi, RejectsNegativeArguments) {
  const ConstitutiveParams law(2.5, 1e-4);
  EXPECT_THROW(phi(law, -1.0), std::domain_error);
  EXPECT_THROW(phi_shifted(law, -1.0, 1.0), std::domain_error);
  EXPECT_THROW(phi_conjugate(law, 0.0, -1.0), std::domain_error);
  EXPECT_THROW(ConstitutiveParams(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(ConstitutiveParams(2.0, -1.0), std::invalid_argument);
}

TEST(PhiShifted, ZeroShiftAndExamples) {
  const ConstitutiveParams law(2.75, 1e-4);
  for (double t : {0.0, 0.3, 4.0}) EXPECT_NEAR(phi_shifted(law, 0.0, t), phi(law, t), 1e-14);
  for (double a : {0.0, 1.0, 7.0}) EXPECT_NEAR(phi_shifted_prime(ConstitutiveParams(2.0, 0.0), a, 1.5), 1.5, 1e-14);
  EXPECT_NEAR(phi_shifted_prime(ConstitutiveParams(3.0, 0.0), 1.0, 2.0), 6.0, 1e-14);
}

TEST(PhiConjugate, Examples) {
  EXPECT_NEAR(phi_conjugate(ConstitutiveParams(2.0, 0.0), 0.0, 1.7), 1.7 * 1.7 / 2.0, 1e-13);
  EXPECT_EQ(phi_conjugate(ConstitutiveParams(2.6, 1e-4), 0.5, 0.0), 0.0);
  // p = 3, delta = 0: phi = t^3/3, phi^*(s) = (2/3) s^{3/2}.
  const ConstitutiveParams cubic(3.0, 0.0);
  for (double s : {0.5, 1.0, 4.0}) {
    EXPECT_NEAR(phi_conjugate(cubic, 0.0, s), 2.0 / 3.0 * std::pow(s, 1.5), 1e-12);
    EXPECT_NEAR(phi_conjugate(cubic, 0.0, s), test::conjugate_by_grid(cubic, 0.0, s), 1e-8);
  }
}

TEST(PhiConjugate, MatchesGridMaximization) {
  for (double p : kExperimentP) EXPECT_LE(test::conjugate_oracle_error(ConstitutiveParams(p, 1e-4)), 1e-8) << p;
}

TEST(PhiConjugate, YoungInequality) {
  const ConstitutiveParams law(2.5, 1e-4);
  for (int i = 0; i < 200; ++i) {
    const double a = uniform(0, 2), s = uniform(0, 3), t = uniform(0, 3);
    EXPECT_LE(s * t, phi_shifted(law, a, t) + phi_conjugate(law, a, s) + 1e-12);
  }
}

TEST(Stress, Examples) {
  const ConstitutiveParams law(3.0, 1e-4);
  EXPECT_EQ(stress(law, Mat2::Zero()), Mat2::Zero());
  EXPECT_LT((stress(law, Mat2::Identity()) - (1e-4 + std::sqrt(2.0)) * Mat2::Identity()).norm(), 1e-14);
  const ConstitutiveParams lin(2.0, 0.0);
  for (int i = 0; i < 10; ++i) {
    const Mat2 a = random_matrix();
    EXPECT_LT((stress(lin, a) - sym(a)).norm(), 1e-14);
    EXPECT_LT((f_map(lin, a) - sym(a)).norm(), 1e-14);
  }
}

TEST(Stress, ShiftedExamples) {
  const ConstitutiveParams law(2.5, 0.0);
  const Mat2 a = Eigen::Vector2d(1.0, 0.0).asDiagonal();
  EXPECT_LT((stress_shifted(law, 1.0, a) - std::sqrt(2.0) * a).norm(), 1e-14);
  const Mat2 b = random_matrix();
  EXPECT_LT((stress_shifted(law, 0.0, b) - stress(law, b)).norm(), 1e-14);
  Mat2 skew;
  skew << 0.0, 1.0, -1.0, 0.0;
  EXPECT_EQ(stress_shifted(law, 0.7, skew), Mat2::Zero());
}

TEST(FMap, Examples) {
  EXPECT_EQ(f_map(ConstitutiveParams(2.5, 1e-4), Mat2::Zero()), Mat2::Zero());
  EXPECT_LT((f_map(ConstitutiveParams(4.0, 0.0), Mat2::Identity()) - std::sqrt(2.0) * Mat2::Identity()).norm(), 1e-14);
}

TEST(Stress, DependsOnSymmetricPartOnly) {
  const ConstitutiveParams law(2.75, 1e-4);
  for (int i = 0; i < 20; ++i) {
    const Mat2 a = random_matrix(3.0);
    EXPECT_EQ(stress(law, a), stress(law, sym(a)));
    EXPECT_EQ(f_map(law, a), f_map(law, sym(a)));
  }
}

TEST(StressTangent, FiniteDifferences) {
  for (double p : kExperimentP) EXPECT_LE(test::tangent_fd_error(ConstitutiveParams(p, 1e-4)), 1e-5) << p;
}

TEST(StressTangent, LinearCaseAndSymmetry) {
  const ConstitutiveParams lin(2.0, 0.0);
  const ConstitutiveParams law(3.25, 1e-4);
  for (int i = 0; i < 20; ++i) {
    const Mat2 a = random_matrix(), b = random_matrix(), c = random_matrix();
    EXPECT_LT((apply(stress_tangent(lin, a), b) - sym(b)).norm(), 1e-14);
    const Eigen::Matrix4d t = stress_tangent(law, a);
    EXPECT_NEAR(ddot(b, apply(t, c)), ddot(c, apply(t, b)), 1e-12);
  }
  EXPECT_LT((apply(stress_tangent(law, Mat2::Zero()), Mat2::Identity()) - std::pow(1e-4, 1.25) * Mat2::Identity()).norm(), 1e-18);
}

TEST(StressTangent, ShiftedMatchesFiniteDifferences) {
  const ConstitutiveParams law(2.5, 1e-4);
  const Mat2 a = random_matrix(), b = random_matrix();
  const double eps = 1e-6, shift = 0.4;
  const Mat2 fd = (stress_shifted(law, shift, a + eps * b) - stress_shifted(law, shift, a - eps * b)) / (2 * eps);
  EXPECT_LT((fd - apply(stress_shifted_tangent(law, shift, a), b)).norm(), 1e-8);
}

TEST(Hammer, EquivalenceConstantIsUniform) {
  for (double p : kExperimentP) {
    const double c = test::hammer_constant(ConstitutiveParams(p, 1e-4));
    EXPECT_LE(c, 100.0) << "p=" << p;
    RecordProperty("hammer_c_p" + std::to_string(p), std::to_string(c));
  }
}

TEST(ChangeOfShift, HoldsWithFixedConstant) {
  // phi_{|B|}(t) <= c_eps phi_{|A|}(t) + eps |F(B) - F(A)|^2.
  for (double p : kExperimentP) {
    const ConstitutiveParams law(p, 1e-4);
    for (double eps : {0.1, 1.0}) {
      double fitted = 0.0;
      for (int i = 0; i < 2000; ++i) {
        const Mat2 a = sym(random_matrix(5.0)), b = sym(random_matrix(5.0));
        const double t = uniform(0.0, 5.0);
        const double lhs = phi_shifted(law, b.norm(), t);
        const double slack = lhs - eps * (f_map(law, b) - f_map(law, a)).squaredNorm();
        if (slack > 0.0) fitted = std::max(fitted, slack / phi_shifted(law, a.norm(), t));
        if (eps == 1.0) {
          EXPECT_LE(lhs, 1e4 * phi_shifted(law, a.norm(), t) + eps * (f_map(law, b) - f_map(law, a)).squaredNorm());
        }
      }
      EXPECT_TRUE(std::isfinite(fitted));
    }
  }
}

TEST(Modular, ConstantFields) {
  const Mesh m = build_mesh(1);
  EXPECT_NEAR(modular_cells(m, [](double t) { return t * t; }, [](int, const Vec2&) { return 1.0; }), 4.0, 1e-10);
  EXPECT_EQ(modular_cells(m, [](double t) { return t * t; }, [](int, const Vec2&) { return Vec2::Zero().eval(); }), 0.0);
  const ConstitutiveParams cubic(3.0, 0.0);
  EXPECT_NEAR(modular_cells(m, [&](double t) { return phi(cubic, t); }, [](int, const Vec2&) { return 1.0; }), 4.0 / 3.0, 1e-12);
  // Total face length of the level-1 mesh: 8 boundary edges of length 1/2
  // plus the interior ones.
  double length = 0.0;
  for (int f = 0; f < m.num_faces(); ++f) length += m.face_geometry(f).length;
  EXPECT_NEAR(modular_faces(m, [](double t) { return t; }, [](int, const Vec2&) { return 1.0; }), length, 1e-12);
}

TEST(Modular, LuxembourgNormBound) {
  // rho_{phi_a}(f) <= c0 gamma  =>  ||f||_{phi_a} <= (2 c0)^{1/2} Delta_2(phi) gamma^{1/p}
  // with c0 = 1 and gamma = rho_{phi_a}(f) <= 1.
  const Mesh m = build_mesh(1);
  for (double p : kExperimentP) {
    const ConstitutiveParams law(p, 1e-4);
    const double delta2 = std::pow(2.0, std::max(2.0, p));
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> shift(m.num_elements());
      for (double& s : shift) s = uniform(0.0, 2.0);
      const double amp = uniform(0.01, 1.0);
      const double c1 = uniform(-3, 3), c2 = uniform(-3, 3);
      auto f = [&](int, const Vec2& x) { return amp * std::abs(std::sin(c1 * x.x() + c2 * x.y())); };
      auto modular = [&](double scale) {
        return modular_cells(m, [&](int k, double t) { return phi_shifted(law, shift[k], t); },
                             [&](int k, const Vec2& x) { return scale * f(k, x); });
      };
      const double gamma = modular(1.0);
      if (!(gamma <= 1.0) || gamma == 0.0) continue;
      const double norm = test::luxembourg_norm(modular);
      EXPECT_LE(norm, std::sqrt(2.0) * delta2 * std::pow(gamma, 1.0 / p)) << p;
    }
  }
}
