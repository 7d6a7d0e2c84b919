#pragma once

#include "pldg/constitutive.hpp"
#include "pldg/femspace.hpp"
#include "pldg/mesh.hpp"
#include "pldg/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace pldg {

/// Vector-valued function of a physical point. An empty function stands for
/// the zero function (homogeneous boundary datum).
using VectorFunction = std::function<Vec2(const Vec2&)>;

/// Traces of a broken field at the quadrature points of one face.
struct FaceTraceData {
  int face = -1;
  bool boundary = false;
  Vec2 normal = Vec2::Zero();  // outward normal of K+
  std::vector<Vec2> points;
  std::vector<double> weights;  // include the face length
  std::vector<Eigen::VectorXd> plus;
  std::vector<Eigen::VectorXd> minus;  // boundary datum on boundary faces (zero if none)

  /// {w} = (w+ + w-)/2 inside, the single trace on the boundary.
  Eigen::VectorXd average(std::size_t q) const { return boundary ? plus[q] : Eigen::VectorXd(0.5 * (plus[q] + minus[q])); }

  /// [[w (x) n]] = w+ (x) n+ + w- (x) n- = (w+ - w-) (x) n. On the boundary
  /// w- is the datum, so this is (w - v*) (x) n.
  Mat2 jump(std::size_t q) const {
    if (plus[q].size() != 2) throw std::logic_error("FaceTraceData::jump: vector field expected");
    return (plus[q] - minus[q]) * normal.transpose();
  }

  /// [[w n]] for scalar fields.
  Vec2 scalar_jump(std::size_t q) const {
    if (plus[q].size() != 1) throw std::logic_error("FaceTraceData::scalar_jump: scalar field expected");
    return (plus[q](0) - minus[q](0)) * normal;
  }
};

inline FaceTraceData jump_and_average(const Mesh& mesh, const BrokenField& w, int face,
                                      const VectorFunction& datum = {}, int quad_degree = -1) {
  const FaceGeometry g = mesh.face_geometry(face);
  const EdgeRule rule = edge_rule(quad_degree < 0 ? 2 * w.degree() + 6 : quad_degree);
  FaceTraceData out;
  out.face = face;
  out.boundary = g.minus < 0;
  out.normal = g.normal;
  const ElementMap map_plus = element_map(mesh, g.plus);
  const ElementMap map_minus = out.boundary ? ElementMap{} : element_map(mesh, g.minus);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Vec2 x = g.point(rule.points[q]);
    out.points.push_back(x);
    out.weights.push_back(rule.weights[q] * g.length);
    out.plus.push_back(evaluate(w, g.plus, map_plus.to_reference(x)));
    if (!out.boundary) {
      out.minus.push_back(evaluate(w, g.minus, map_minus.to_reference(x)));
    } else if (datum && w.components() == 2) {
      out.minus.push_back(datum(x));
    } else {
      out.minus.push_back(Eigen::VectorXd::Zero(w.components()));
    }
  }
  return out;
}

/// DG gradient G_h^k = grad_h - R_h^k of degree-k vector fields, stored as
/// local operators. On element K the tensor coefficients of G_h^k w are
///   matrix(K) * gather(w, K) + datum_part(K),
/// where gather collects the velocity blocks of the stencil of K (K itself,
/// then its face neighbors). Boundary jumps are taken against the datum v*,
/// i.e. (w - v*) (x) n, which yields the affine datum part.
class DGGradient {
 public:
  DGGradient(const Mesh& mesh, int degree, const VectorFunction& datum = {}, int datum_quad_degree = -1)
      : mesh_(&mesh), degree_(degree) {
    if (degree < 0) throw std::invalid_argument("DGGradient: negative degree");
    const ReferenceBasis& basis = reference_basis(degree);
    const int nb = basis.size();
    const EdgeRule rule = edge_rule(2 * degree);
    const EdgeRule datum_rule = edge_rule(datum_quad_degree < 0 ? 2 * degree + 8 : datum_quad_degree);
    const int ne = mesh.num_elements();
    stencils_.resize(ne);
    gradient_.resize(ne);
    lifting_.resize(ne);
    datum_.assign(ne, Eigen::VectorXd::Zero(4 * nb));

    for (int k = 0; k < ne; ++k) {
      auto& st = stencils_[k];
      st.push_back(k);
      for (int e = 0; e < 3; ++e)
        if (const int nk = mesh.neighbor(k, e); nk >= 0) st.push_back(nk);
      const int cols = 2 * nb * static_cast<int>(st.size());
      const ElementMap map = element_map(mesh, k);

      // Elementwise gradient, exact in the nodal basis since grad P_k is in P_k.
      Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(4 * nb, cols);
      for (int n = 0; n < nb; ++n) {
        const Eigen::MatrixX2d dphi = map.physical_gradients(basis.gradients(basis.nodes()[n]));
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            for (int b = 0; b < nb; ++b) grad((2 * i + j) * nb + n, i * nb + b) = dphi(b, j);
      }

      // Face terms of (R w, X)_K = sum_{faces of K} omega <[[w (x) n]], X|_K>.
      Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(4 * nb, cols);
      Eigen::VectorXd raw_datum = Eigen::VectorXd::Zero(4 * nb);
      for (int e = 0; e < 3; ++e) {
        const Face& f = mesh.face(mesh.element_faces(k)[e]);
        const Vec2 n = mesh.outward_normal(k, e);
        const auto [va, vb] = mesh.edge_vertices(k, e);
        const Vec2 a = mesh.vertex(va), b = mesh.vertex(vb);
        const double len = f.length;
        const int nk = mesh.neighbor(k, e);
        const double omega = nk < 0 ? 1.0 : 0.5;
        int slot = 0;
        ElementMap nmap;
        if (nk >= 0) {
          slot = static_cast<int>(std::find(st.begin(), st.end(), nk) - st.begin());
          nmap = element_map(mesh, nk);
        }
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
          const Vec2 x = a + rule.points[q] * (b - a);
          const double wq = omega * len * rule.weights[q];
          const Eigen::VectorXd phi = basis.values(map.to_reference(x));
          const Eigen::VectorXd phin = nk >= 0 ? basis.values(nmap.to_reference(x)) : Eigen::VectorXd();
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
              for (int r = 0; r < nb; ++r)
                for (int c = 0; c < nb; ++c) {
                  raw((2 * i + j) * nb + r, i * nb + c) += wq * n(j) * phi(r) * phi(c);
                  if (nk >= 0) raw((2 * i + j) * nb + r, slot * 2 * nb + i * nb + c) -= wq * n(j) * phi(r) * phin(c);
                }
        }
        if (nk < 0 && datum) {
          for (std::size_t q = 0; q < datum_rule.points.size(); ++q) {
            const Vec2 x = a + datum_rule.points[q] * (b - a);
            const double wq = len * datum_rule.weights[q];
            const Eigen::VectorXd phi = basis.values(map.to_reference(x));
            const Vec2 v = datum(x);
            for (int i = 0; i < 2; ++i)
              for (int j = 0; j < 2; ++j) raw_datum.segment((2 * i + j) * nb, nb) += wq * v(i) * n(j) * phi;
          }
        }
      }
      // Apply the inverse element mass matrix, det * M_ref, per component.
      for (int c = 0; c < 4; ++c) {
        const Eigen::MatrixXd rows = basis.mass_factor().solve(raw.middleRows(c * nb, nb)) / map.det;
        const Eigen::VectorXd seg = basis.mass_factor().solve(raw_datum.segment(c * nb, nb)) / map.det;
        raw.middleRows(c * nb, nb) = rows;
        raw_datum.segment(c * nb, nb) = seg;
      }
      lifting_[k] = raw;
      gradient_[k] = grad - raw;
      datum_[k] = raw_datum;
    }
  }

  const Mesh& mesh() const { return *mesh_; }
  int degree() const { return degree_; }
  int basis_size() const { return (degree_ + 1) * (degree_ + 2) / 2; }
  const std::vector<int>& stencil(int k) const { return stencils_.at(k); }
  /// Homogeneous part of G_h^k on element k.
  const Eigen::MatrixXd& matrix(int k) const { return gradient_.at(k); }
  /// Homogeneous part of R_h^k on element k.
  const Eigen::MatrixXd& lifting_matrix(int k) const { return lifting_.at(k); }
  /// Contribution of the boundary datum: added to G_h^k, subtracted from R_h^k.
  const Eigen::VectorXd& datum_part(int k) const { return datum_.at(k); }

  Eigen::VectorXd gather(const BrokenField& w, int k) const {
    check(w);
    const auto& st = stencils_[k];
    const int bs = w.block_size();
    Eigen::VectorXd out(bs * static_cast<int>(st.size()));
    for (std::size_t s = 0; s < st.size(); ++s) out.segment(s * bs, bs) = w.block(st[s]);
    return out;
  }

  /// G_h^k w including the datum.
  BrokenField gradient(const BrokenField& w) const {
    BrokenField out(*mesh_, FieldShape::tensor, degree_);
    for (int k = 0; k < mesh_->num_elements(); ++k) out.block(k) = gradient_[k] * gather(w, k) + datum_[k];
    return out;
  }

  /// R_h^k w with boundary jumps (w - v*) (x) n.
  BrokenField lifting(const BrokenField& w) const {
    BrokenField out(*mesh_, FieldShape::tensor, degree_);
    for (int k = 0; k < mesh_->num_elements(); ++k) out.block(k) = lifting_[k] * gather(w, k) - datum_[k];
    return out;
  }

 private:
  void check(const BrokenField& w) const {
    if (w.shape() != FieldShape::vector || w.degree() != degree_ || w.num_elements() != mesh_->num_elements())
      throw std::invalid_argument("DGGradient: field does not match the operator's space");
  }

  const Mesh* mesh_;
  int degree_;
  std::vector<std::vector<int>> stencils_;
  std::vector<Eigen::MatrixXd> gradient_;
  std::vector<Eigen::MatrixXd> lifting_;
  std::vector<Eigen::VectorXd> datum_;
};

inline BrokenField lifting(const Mesh& mesh, const BrokenField& w, const VectorFunction& datum = {}) {
  return DGGradient(mesh, w.degree(), datum).lifting(w);
}

inline BrokenField dg_gradient(const Mesh& mesh, const BrokenField& w, const VectorFunction& datum = {}) {
  return DGGradient(mesh, w.degree(), datum).gradient(w);
}

/// Symmetric part of the DG gradient, D_h^k w = [G_h^k w]^sym.
inline BrokenField dg_sym_gradient(const Mesh& mesh, const BrokenField& w, const VectorFunction& datum = {}) {
  BrokenField g = dg_gradient(mesh, w, datum);
  const int nb = g.basis_size();
  for (int k = 0; k < g.num_elements(); ++k) {
    auto b = g.block(k);
    const Eigen::VectorXd off = 0.5 * (b.segment(nb, nb) + b.segment(2 * nb, nb));
    b.segment(nb, nb) = off;
    b.segment(2 * nb, nb) = off;
  }
  return g;
}

/// DG divergence tr(G_h^k w).
inline BrokenField dg_divergence(const Mesh& mesh, const BrokenField& w, const VectorFunction& datum = {}) {
  const BrokenField g = dg_gradient(mesh, w, datum);
  BrokenField out(mesh, FieldShape::scalar, g.degree());
  const int nb = g.basis_size();
  for (int k = 0; k < g.num_elements(); ++k) out.block(k) = g.block(k).segment(0, nb) + g.block(k).segment(3 * nb, nb);
  return out;
}

enum class DGNormVariant { full, sym };

/// ||grad_h w||_p + h^{1/p} ||h^{-1} [[w (x) n]]||_{p,Gamma_h} (full), or with
/// the symmetric broken gradient D_h w in place of grad_h w (sym). h is the
/// global mesh size.
inline double dg_norm(const Mesh& mesh, const BrokenField& w, const VectorFunction& datum, double p,
                      DGNormVariant variant = DGNormVariant::full) {
  if (!(p > 1.0)) throw std::invalid_argument("dg_norm: p must exceed 1");
  const double h = mesh.h_max();
  const QuadratureRule rule = triangle_rule(std::max(2, 2 * w.degree() + 2));
  double bulk = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const double det = element_map(mesh, k).det;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      Mat2 g = gradient(mesh, w, k, rule.points[q]);
      if (variant == DGNormVariant::sym) g = sym(g);
      bulk += rule.weights[q] * det * std::pow(g.norm(), p);
    }
  }
  double jumps = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const FaceTraceData t = jump_and_average(mesh, w, f, datum);
    for (std::size_t q = 0; q < t.points.size(); ++q) jumps += t.weights[q] * std::pow(t.jump(q).norm() / h, p);
  }
  return std::pow(bulk, 1.0 / p) + std::pow(h, 1.0 / p) * std::pow(jumps, 1.0 / p);
}

/// m_{psi,h}(w) = h rho_{psi,Gamma_h}(h^{-1} [[w (x) n]]). `psi(face, t)` or
/// `psi(t)`; the face index allows a facewise shift.
template <class Psi>
double jump_pseudo_modular(const Mesh& mesh, Psi&& psi, const BrokenField& w, const VectorFunction& datum = {}) {
  const double h = mesh.h_max();
  double s = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const FaceTraceData t = jump_and_average(mesh, w, f, datum);
    for (std::size_t q = 0; q < t.points.size(); ++q) {
      const double m = t.jump(q).norm() / h;
      double value;
      if constexpr (std::is_invocable_v<Psi, int, double>) value = psi(f, m);
      else value = psi(m);
      s += t.weights[q] * value;
    }
  }
  return h * s;
}

}  // namespace pldg
