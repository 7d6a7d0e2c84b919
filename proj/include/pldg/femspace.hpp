#pragma once

#include "pldg/mesh.hpp"
#include "pldg/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace pldg {

/// Lagrange basis of P_k on the reference triangle {(0,0),(1,0),(0,1)} with
/// equispaced nodes. Nodes are ordered: the three vertices, then the k-1
/// nodes of each local edge e (running from vertex e+1 to vertex e+2), then
/// interior nodes. For k = 0 the single node is the centroid.
class ReferenceBasis {
 public:
  explicit ReferenceBasis(int degree) : degree_(degree) {
    if (degree < 0) throw std::invalid_argument("ReferenceBasis: negative degree");
    for (int total = 0; total <= degree; ++total)
      for (int j = 0; j <= total; ++j) exponents_.push_back({total - j, j});
    build_nodes();
    const int n = size();
    Eigen::MatrixXd vandermonde(n, n);
    for (int a = 0; a < n; ++a) vandermonde.row(a) = monomials(nodes_[a]).transpose();
    coefficients_ = vandermonde.inverse();

    const QuadratureRule rule = triangle_rule(2 * degree);
    mass_ = Eigen::MatrixXd::Zero(n, n);
    integrals_ = Eigen::VectorXd::Zero(n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd phi = values(rule.points[q]);
      mass_ += rule.weights[q] * phi * phi.transpose();
      integrals_ += rule.weights[q] * phi;
    }
    mass_factor_ = mass_.llt();
  }

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  Eigen::VectorXd values(const Vec2& xi) const { return coefficients_.transpose() * monomials(xi); }

  /// Row a holds the reference gradient of basis function a.
  Eigen::MatrixX2d gradients(const Vec2& xi) const {
    const int n = size();
    Eigen::MatrixX2d dm(n, 2);
    for (int m = 0; m < n; ++m) {
      const auto [i, j] = exponents_[m];
      dm(m, 0) = i == 0 ? 0.0 : i * ipow(xi.x(), i - 1) * ipow(xi.y(), j);
      dm(m, 1) = j == 0 ? 0.0 : j * ipow(xi.x(), i) * ipow(xi.y(), j - 1);
    }
    return coefficients_.transpose() * dm;
  }

  /// Mass matrix on the reference triangle.
  const Eigen::MatrixXd& mass() const { return mass_; }
  const Eigen::LLT<Eigen::MatrixXd>& mass_factor() const { return mass_factor_; }
  /// Integrals of the basis functions over the reference triangle.
  const Eigen::VectorXd& integrals() const { return integrals_; }

 private:
  static double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
  }

  Eigen::VectorXd monomials(const Vec2& xi) const {
    Eigen::VectorXd m(size());
    for (int i = 0; i < size(); ++i) m(i) = ipow(xi.x(), exponents_[i][0]) * ipow(xi.y(), exponents_[i][1]);
    return m;
  }

  void build_nodes() {
    const int k = degree_;
    if (k == 0) {
      nodes_ = {Vec2(1.0 / 3.0, 1.0 / 3.0)};
      return;
    }
    const std::array<Vec2, 3> corner = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    nodes_.assign(corner.begin(), corner.end());
    for (int e = 0; e < 3; ++e) {
      const Vec2& a = corner[(e + 1) % 3];
      const Vec2& b = corner[(e + 2) % 3];
      for (int j = 1; j < k; ++j) nodes_.push_back(a + (double(j) / k) * (b - a));
    }
    for (int j = 1; j < k; ++j)
      for (int i = 1; i + j < k; ++i) nodes_.emplace_back(double(i) / k, double(j) / k);
  }

  int degree_;
  std::vector<std::array<int, 2>> exponents_;
  std::vector<Vec2> nodes_;
  Eigen::MatrixXd coefficients_;
  Eigen::MatrixXd mass_;
  Eigen::LLT<Eigen::MatrixXd> mass_factor_;
  Eigen::VectorXd integrals_;
};

/// Shared basis instances for degrees 0..8.
inline const ReferenceBasis& reference_basis(int degree) {
  constexpr int max_degree = 8;
  if (degree < 0 || degree > max_degree) throw std::invalid_argument("reference_basis: unsupported degree");
  static std::array<std::unique_ptr<ReferenceBasis>, max_degree + 1> cache;
  static std::array<std::once_flag, max_degree + 1> once;
  std::call_once(once[degree], [&] { cache[degree] = std::make_unique<ReferenceBasis>(degree); });
  return *cache[degree];
}

/// Affine map x = origin + jacobian * xi from the reference triangle.
struct ElementMap {
  Vec2 origin = Vec2::Zero();
  Mat2 jacobian = Mat2::Identity();
  Mat2 inverse = Mat2::Identity();
  double det = 1.0;

  Vec2 to_physical(const Vec2& xi) const { return origin + jacobian * xi; }
  Vec2 to_reference(const Vec2& x) const { return inverse * (x - origin); }
  /// Physical gradients from reference gradients (one row per function).
  Eigen::MatrixX2d physical_gradients(const Eigen::MatrixX2d& ref) const { return ref * inverse; }
};

inline ElementMap element_map(const Mesh& mesh, int k) {
  const auto& t = mesh.triangle(k);
  ElementMap m;
  m.origin = mesh.vertex(t[0]);
  m.jacobian.col(0) = mesh.vertex(t[1]) - m.origin;
  m.jacobian.col(1) = mesh.vertex(t[2]) - m.origin;
  m.inverse = m.jacobian.inverse();
  m.det = m.jacobian.determinant();
  return m;
}

enum class FieldShape { scalar = 1, vector = 2, tensor = 4 };

/// Flattened components of a point value: vectors by index, tensors row-major
/// (component 2i+j holds entry (i,j)).
inline Eigen::VectorXd flatten(double v) { return Eigen::VectorXd::Constant(1, v); }
inline Eigen::VectorXd flatten(const Vec2& v) { return v; }
inline Eigen::VectorXd flatten(const Mat2& m) {
  Eigen::VectorXd v(4);
  v << m(0, 0), m(0, 1), m(1, 0), m(1, 1);
  return v;
}
inline Mat2 unflatten_tensor(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Mat2 m;
  m << v(0), v(1), v(2), v(3);
  return m;
}

/// Piecewise polynomial field of degree k without inter-element continuity
/// (scalar Q_h^k, vector V_h^k or tensor X_h^k). Coefficients are nodal
/// values, stored element by element, component by component.
class BrokenField {
 public:
  BrokenField() = default;
  BrokenField(int num_elements, FieldShape shape, int degree)
      : shape_(shape), degree_(degree), num_elements_(num_elements) {
    coefficients_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_elements) * block_size());
  }
  BrokenField(const Mesh& mesh, FieldShape shape, int degree) : BrokenField(mesh.num_elements(), shape, degree) {}

  FieldShape shape() const { return shape_; }
  int components() const { return static_cast<int>(shape_); }
  int degree() const { return degree_; }
  int num_elements() const { return num_elements_; }
  int basis_size() const { return (degree_ + 1) * (degree_ + 2) / 2; }
  int block_size() const { return components() * basis_size(); }

  Eigen::VectorXd& coefficients() { return coefficients_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }

  auto block(int k) { return coefficients_.segment(static_cast<Eigen::Index>(k) * block_size(), block_size()); }
  auto block(int k) const {
    return coefficients_.segment(static_cast<Eigen::Index>(k) * block_size(), block_size());
  }
  double& operator()(int k, int component, int node) {
    return coefficients_[static_cast<Eigen::Index>(k) * block_size() + component * basis_size() + node];
  }
  double operator()(int k, int component, int node) const {
    return coefficients_[static_cast<Eigen::Index>(k) * block_size() + component * basis_size() + node];
  }

 private:
  FieldShape shape_ = FieldShape::scalar;
  int degree_ = 0;
  int num_elements_ = 0;
  Eigen::VectorXd coefficients_;
};

/// All components of `field` on element k at reference point xi.
inline Eigen::VectorXd evaluate(const BrokenField& field, int k, const Vec2& xi) {
  if (k < 0 || k >= field.num_elements()) throw std::out_of_range("evaluate: invalid element");
  const Eigen::VectorXd phi = reference_basis(field.degree()).values(xi);
  const int n = field.basis_size();
  Eigen::VectorXd out(field.components());
  const auto b = field.block(k);
  for (int c = 0; c < field.components(); ++c) out(c) = b.segment(c * n, n).dot(phi);
  return out;
}

inline double evaluate_scalar(const BrokenField& f, int k, const Vec2& xi) { return evaluate(f, k, xi)(0); }
inline Vec2 evaluate_vector(const BrokenField& f, int k, const Vec2& xi) { return evaluate(f, k, xi); }
inline Mat2 evaluate_tensor(const BrokenField& f, int k, const Vec2& xi) { return unflatten_tensor(evaluate(f, k, xi)); }

/// Elementwise gradient of a vector field: entry (i,j) = d_j v_i.
inline Mat2 gradient(const Mesh& mesh, const BrokenField& field, int k, const Vec2& xi) {
  if (field.shape() != FieldShape::vector) throw std::invalid_argument("gradient: vector field expected");
  if (k < 0 || k >= field.num_elements()) throw std::out_of_range("gradient: invalid element");
  const ElementMap map = element_map(mesh, k);
  const Eigen::MatrixX2d dphi = map.physical_gradients(reference_basis(field.degree()).gradients(xi));
  const int n = field.basis_size();
  Mat2 g;
  for (int i = 0; i < 2; ++i) g.row(i) = field.block(k).segment(i * n, n).transpose() * dphi;
  return g;
}

/// Local L2 projection onto the broken space of the given shape and degree.
/// `f` maps a physical point to double, Vec2 or Mat2.
template <class F>
BrokenField l2_project(const Mesh& mesh, FieldShape shape, int degree, F&& f, int quad_degree = -1) {
  const ReferenceBasis& basis = reference_basis(degree);
  const QuadratureRule rule = triangle_rule(quad_degree < 0 ? 2 * degree + 6 : quad_degree);
  BrokenField out(mesh, shape, degree);
  const int n = basis.size();
  const int nc = out.components();
  std::vector<Eigen::VectorXd> phi;
  for (const auto& xi : rule.points) phi.push_back(basis.values(xi));
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const ElementMap map = element_map(mesh, k);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, nc);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd value = flatten(f(map.to_physical(rule.points[q])));
      if (value.size() != nc) throw std::invalid_argument("l2_project: value shape mismatch");
      rhs += rule.weights[q] * phi[q] * value.transpose();
    }
    // The element mass matrix is det * reference mass; the det cancels.
    const Eigen::MatrixXd sol = basis.mass_factor().solve(rhs);
    for (int c = 0; c < nc; ++c) out.block(k).segment(c * n, n) = sol.col(c);
  }
  return out;
}

/// L2 inner product (a, b) of two broken fields of equal shape.
inline double inner_product(const Mesh& mesh, const BrokenField& a, const BrokenField& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("inner_product: shape mismatch");
  const QuadratureRule rule = triangle_rule(a.degree() + b.degree());
  double s = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const double det = element_map(mesh, k).det;
    for (std::size_t q = 0; q < rule.size(); ++q)
      s += rule.weights[q] * det * evaluate(a, k, rule.points[q]).dot(evaluate(b, k, rule.points[q]));
  }
  return s;
}

/// Degree-k Lagrange finite element space of continuous scalar functions.
/// Global dofs: vertices first (by vertex id), then k-1 per face (ordered
/// along the face's stored vertex pair), then interior nodes per element.
/// Holds a non-owning pointer to the mesh.
class ContinuousSpace {
 public:
  ContinuousSpace(const Mesh& mesh, int degree) : mesh_(&mesh), degree_(degree) {
    if (degree < 1) throw std::invalid_argument("ContinuousSpace: degree must be >= 1");
    const int k = degree;
    const int per_edge = k - 1;
    const int per_cell = (k - 1) * (k - 2) / 2;
    const int edge_base = mesh.num_vertices();
    const int cell_base = edge_base + per_edge * mesh.num_faces();
    size_ = cell_base + per_cell * mesh.num_elements();
    const ReferenceBasis& basis = reference_basis(k);
    element_dofs_.assign(mesh.num_elements(), std::vector<int>(basis.size()));
    points_.assign(size_, Vec2::Zero());
    for (int e = 0; e < mesh.num_elements(); ++e) {
      auto& dofs = element_dofs_[e];
      const auto& t = mesh.triangle(e);
      for (int v = 0; v < 3; ++v) dofs[v] = t[v];
      int local = 3;
      for (int le = 0; le < 3; ++le) {
        const int fid = mesh.element_faces(e)[le];
        const auto [a, b] = mesh.edge_vertices(e, le);
        const bool same = mesh.face(fid).vertices[0] == a;
        for (int j = 0; j < per_edge; ++j)
          dofs[local++] = edge_base + fid * per_edge + (same ? j : per_edge - 1 - j);
      }
      for (int j = 0; j < per_cell; ++j) dofs[local++] = cell_base + e * per_cell + j;
      const ElementMap map = element_map(mesh, e);
      for (int a = 0; a < basis.size(); ++a) points_[dofs[a]] = map.to_physical(basis.nodes()[a]);
    }
  }

  const Mesh& mesh() const { return *mesh_; }
  int degree() const { return degree_; }
  int size() const { return size_; }
  const std::vector<int>& element_dofs(int k) const { return element_dofs_.at(k); }
  /// Lagrange node of each global dof.
  const std::vector<Vec2>& dof_points() const { return points_; }

 private:
  const Mesh* mesh_;
  int degree_;
  int size_ = 0;
  std::vector<std::vector<int>> element_dofs_;
  std::vector<Vec2> points_;
};

/// Coefficients of a function in a ContinuousSpace.
struct ContinuousField {
  Eigen::VectorXd coefficients;
  bool zero_mean = false;
};

template <class F>
ContinuousField interpolate(const ContinuousSpace& space, F&& f) {
  ContinuousField out{Eigen::VectorXd(space.size()), false};
  for (int i = 0; i < space.size(); ++i) out.coefficients(i) = f(space.dof_points()[i]);
  return out;
}

inline double evaluate(const ContinuousSpace& space, const ContinuousField& q, int k, const Vec2& xi) {
  if (k < 0 || k >= space.mesh().num_elements()) throw std::out_of_range("evaluate: invalid element");
  const Eigen::VectorXd phi = reference_basis(space.degree()).values(xi);
  const auto& dofs = space.element_dofs(k);
  double s = 0.0;
  for (std::size_t a = 0; a < dofs.size(); ++a) s += q.coefficients(dofs[a]) * phi(a);
  return s;
}

/// Integrals of the global basis functions, c_j = int phi_j dx.
inline Eigen::VectorXd basis_integrals(const ContinuousSpace& space) {
  const ReferenceBasis& basis = reference_basis(space.degree());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(space.size());
  for (int k = 0; k < space.mesh().num_elements(); ++k) {
    const double det = element_map(space.mesh(), k).det;
    const auto& dofs = space.element_dofs(k);
    for (std::size_t a = 0; a < dofs.size(); ++a) c(dofs[a]) += det * basis.integrals()(a);
  }
  return c;
}

inline double integral(const ContinuousSpace& space, const ContinuousField& q) {
  return basis_integrals(space).dot(q.coefficients);
}

/// Subtracts the mean value over the domain. Lagrange bases sum to one, so
/// a constant shift of every coefficient shifts the function.
inline ContinuousField zero_mean_projection(const ContinuousSpace& space, const ContinuousField& q) {
  const double mean = integral(space, q) / space.mesh().total_area();
  ContinuousField out = q;
  out.coefficients.array() -= mean;
  out.zero_mean = true;
  return out;
}

}  // namespace pldg
