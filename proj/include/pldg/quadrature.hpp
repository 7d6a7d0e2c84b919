#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pldg {

/// Points and weights on the unit interval [0,1].
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Points and weights on the reference triangle {(0,0),(1,0),(0,1)}.
struct QuadratureRule {
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

namespace detail {

// Returns (P_n(x), P_n'(x)) via the three-term recurrence.
inline std::array<double, 2> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace detail

/// n-point Gauss-Legendre rule mapped to [0,1].
inline EdgeRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  EdgeRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  rule.degree = 2 * n - 1;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = detail::legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = detail::legendre(n, x)[1];
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = 0.5 * (1.0 - x);
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// Gauss-Legendre rule on [0,1] exact for polynomials up to `degree`.
inline EdgeRule edge_rule(int degree) {
  EdgeRule rule = gauss_legendre(std::max(1, (degree + 2) / 2));
  rule.degree = degree;
  return rule;
}

/// Collapsed (Duffy) tensor Gauss rule on the reference triangle, exact up to
/// `degree`. All weights are positive. The collapsed vertex is (0,1).
inline QuadratureRule triangle_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("triangle_rule: negative degree");
  // x = u(1-v), y = v, dx dy = (1-v) du dv: degree d in u, d+1 in v.
  const EdgeRule ru = gauss_legendre(std::max(1, (degree + 2) / 2));
  const EdgeRule rv = gauss_legendre(std::max(1, (degree + 3) / 2));
  QuadratureRule rule;
  rule.degree = degree;
  for (std::size_t j = 0; j < rv.points.size(); ++j) {
    const double v = rv.points[j];
    for (std::size_t i = 0; i < ru.points.size(); ++i) {
      const double u = ru.points[i];
      rule.points.emplace_back(u * (1.0 - v), v);
      rule.weights.push_back(ru.weights[i] * rv.weights[j] * (1.0 - v));
    }
  }
  return rule;
}

/// Rule on the reference triangle for integrands with an integrable point
/// singularity at reference vertex `vertex` (0: (0,0), 1: (1,0), 2: (0,1)).
/// The triangle is split geometrically towards the vertex: at each of
/// `levels` steps the three red children away from the vertex get a degree
/// `degree` rule and the corner child is split again; the last corner child
/// gets the collapsed rule with its collapsed point at the vertex.
inline QuadratureRule graded_triangle_rule(int degree, int vertex, int levels = 16) {
  if (vertex < 0 || vertex > 2) throw std::invalid_argument("graded_triangle_rule: vertex must be 0, 1 or 2");
  if (levels < 0) throw std::invalid_argument("graded_triangle_rule: negative level count");
  const QuadratureRule base = triangle_rule(degree);
  const std::array<Eigen::Vector2d, 3> ref{Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0)};
  QuadratureRule rule;
  rule.degree = degree;
  // Maps the base rule onto triangle (a, b, c); the base rule collapses at
  // its third vertex, so c is the point that is resolved best.
  auto append = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    const double det = std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    for (std::size_t q = 0; q < base.size(); ++q) {
      const Eigen::Vector2d& xi = base.points[q];
      rule.points.push_back(a + xi.x() * (b - a) + xi.y() * (c - a));
      rule.weights.push_back(base.weights[q] * det);
    }
  };
  Eigen::Vector2d c = ref[vertex], a = ref[(vertex + 1) % 3], b = ref[(vertex + 2) % 3];
  for (int l = 0; l < levels; ++l) {
    const Eigen::Vector2d ca = 0.5 * (c + a), cb = 0.5 * (c + b), ab = 0.5 * (a + b);
    append(ca, a, ab);
    append(ab, b, cb);
    append(ca, ab, cb);
    a = ca;
    b = cb;
  }
  append(a, b, c);
  return rule;
}

}  // namespace pldg
