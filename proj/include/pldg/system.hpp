#pragma once

#include "pldg/constitutive.hpp"
#include "pldg/dgops.hpp"
#include "pldg/femspace.hpp"
#include "pldg/manufactured.hpp"
#include "pldg/mesh.hpp"
#include "pldg/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <vector>

namespace pldg {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct SystemParams {
  ConstitutiveParams law;
  double alpha = 2.5;
  int degree = 1;
  FlowMode mode = FlowMode::navier_stokes;
  /// Quadrature for the nonpolynomial volume and face integrands.
  int cell_quad_degree = 8;
  int face_quad_degree = 8;
};

/// Body force g and boundary velocity v*; empty functions mean zero.
struct ProblemData {
  VectorFunction body_force;
  VectorFunction boundary_velocity;
};

/// Residual and Newton tangent of the primal LDG problem for velocity
/// v_h in V_h^k and continuous pressure q_h in Q_{h,c}^k:
///
///   (S(D v) - 1/2 v(x)v - q I, D_h^k z) + 1/2 ([L] v, z) - (g, z)
///       + alpha <S_a(h^{-1}[[(v - v*)(x)n]]), [[z(x)n]]>_{Gamma_h} = 0,
///   (tr L, z_h) + lambda (1, z_h) = 0,        (q_h, 1) = 0,
///
/// with L = G_h^k v (boundary jumps against v*), D v = L^sym, D_h^k z the
/// homogeneous symmetric DG gradient of the test function and the face shift
/// a = {|Pi^0 L^sym|}. The nonpolynomial pairing with the lifted part of
/// D_h^k z is exact: D_h^k z is a degree-k field, so quadrature against it
/// equals pairing with the local L2 projection. Stokes mode drops both
/// convective terms. Unknowns are [velocity | pressure | lambda]; lambda
/// enforces the zero-mean pressure.
///
/// Holds non-owning pointers to the mesh; the mesh must outlive the system.
class DiscreteSystem {
 public:
  DiscreteSystem(const Mesh& mesh, SystemParams params, ProblemData data)
      : mesh_(&mesh),
        params_(params),
        data_(std::move(data)),
        ops_(mesh, params.degree, data_.boundary_velocity),
        pressure_space_(mesh, params.degree),
        cell_rule_(triangle_rule(params.cell_quad_degree)),
        face_rule_(edge_rule(params.face_quad_degree)) {
    if (params.degree < 1) throw std::invalid_argument("DiscreteSystem: velocity degree must be >= 1");
    if (!(params.alpha > 0.0)) throw std::invalid_argument("DiscreteSystem: alpha must be positive");
    const ReferenceBasis& basis = reference_basis(params.degree);
    nb_ = basis.size();
    h_ = mesh.h_max();
    for (const auto& xi : cell_rule_.points) cell_values_.push_back(basis.values(xi));
    mean_weights_ = basis.integrals() / 0.5;

    const int ne = mesh.num_elements();
    dets_.resize(ne);
    load_.assign(ne, Eigen::VectorXd::Zero(2 * nb_));
    for (int k = 0; k < ne; ++k) {
      const ElementMap map = element_map(mesh, k);
      dets_[k] = map.det;
      if (!data_.body_force) continue;
      // The benchmark force is singular at the origin; integrate it with a
      // rule graded towards that vertex.
      const int corner = origin_vertex(mesh, k);
      const QuadratureRule& rule =
          corner >= 0 ? graded_triangle_rule(params.cell_quad_degree, corner) : cell_rule_;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Eigen::VectorXd phi = basis.values(rule.points[q]);
        const Vec2 g = data_.body_force(map.to_physical(rule.points[q]));
        const double w = rule.weights[q] * map.det;
        load_[k].head(nb_) += w * g.x() * phi;
        load_[k].tail(nb_) += w * g.y() * phi;
      }
    }

    faces_.resize(mesh.num_faces());
    for (int f = 0; f < mesh.num_faces(); ++f) {
      const FaceGeometry g = mesh.face_geometry(f);
      FaceData& fd = faces_[f];
      fd.normal = g.normal;
      const ElementMap mp = element_map(mesh, g.plus);
      const ElementMap mm = g.minus >= 0 ? element_map(mesh, g.minus) : ElementMap{};
      for (std::size_t q = 0; q < face_rule_.points.size(); ++q) {
        const Vec2 x = g.point(face_rule_.points[q]);
        fd.weights.push_back(face_rule_.weights[q] * g.length);
        fd.plus_values.push_back(basis.values(mp.to_reference(x)));
        if (g.minus >= 0) {
          fd.minus_values.push_back(basis.values(mm.to_reference(x)));
        } else {
          fd.datum.push_back(data_.boundary_velocity ? data_.boundary_velocity(x) : Vec2::Zero());
        }
      }
    }
  }

  const Mesh& mesh() const { return *mesh_; }
  const SystemParams& params() const { return params_; }
  const ProblemData& data() const { return data_; }
  const DGGradient& gradient_operator() const { return ops_; }
  const ContinuousSpace& pressure_space() const { return pressure_space_; }
  double h() const { return h_; }

  int velocity_size() const { return 2 * nb_ * mesh_->num_elements(); }
  int pressure_size() const { return pressure_space_.size(); }
  int multiplier_index() const { return velocity_size() + pressure_size(); }
  int size() const { return multiplier_index() + 1; }

  Eigen::VectorXd zero_state() const { return Eigen::VectorXd::Zero(size()); }

  BrokenField velocity(const Eigen::VectorXd& state) const {
    check(state);
    BrokenField v(*mesh_, FieldShape::vector, params_.degree);
    v.coefficients() = state.head(velocity_size());
    return v;
  }

  ContinuousField pressure(const Eigen::VectorXd& state) const {
    check(state);
    return {state.segment(velocity_size(), pressure_size()), true};
  }

  double multiplier(const Eigen::VectorXd& state) const {
    check(state);
    return state(multiplier_index());
  }

  Eigen::VectorXd pack(const BrokenField& v, const ContinuousField& q, double lambda = 0.0) const {
    if (v.coefficients().size() != velocity_size() || q.coefficients.size() != pressure_size())
      throw std::invalid_argument("DiscreteSystem::pack: dimension mismatch");
    Eigen::VectorXd s(size());
    s << v.coefficients(), q.coefficients, lambda;
    return s;
  }

  /// Coefficients of L = G_h^k v on element k (datum included).
  Eigen::VectorXd local_gradient(const Eigen::VectorXd& state, int k) const {
    return ops_.matrix(k) * gather(state, k) + ops_.datum_part(k);
  }

  /// Face shifts a_f = {|Pi^0 L^sym|}: average of the two elementwise means
  /// inside, the single one on the boundary.
  std::vector<double> face_shifts(const Eigen::VectorXd& state) const {
    check(state);
    std::vector<double> cell(mesh_->num_elements());
    for (int k = 0; k < mesh_->num_elements(); ++k) {
      const Eigen::VectorXd lc = local_gradient(state, k);
      Mat2 mean;
      for (int c = 0; c < 4; ++c) mean(c / 2, c % 2) = lc.segment(c * nb_, nb_).dot(mean_weights_);
      cell[k] = sym(mean).norm();
    }
    std::vector<double> shifts(mesh_->num_faces());
    for (int f = 0; f < mesh_->num_faces(); ++f) {
      const Face& face = mesh_->face(f);
      shifts[f] = face.is_boundary() ? cell[face.plus] : 0.5 * (cell[face.plus] + cell[face.minus]);
    }
    return shifts;
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& state) const { return residual(state, face_shifts(state)); }

  Eigen::VectorXd residual(const Eigen::VectorXd& state, const std::vector<double>& shifts) const {
    check(state);
    if (static_cast<int>(shifts.size()) != mesh_->num_faces())
      throw std::invalid_argument("DiscreteSystem::residual: shift count mismatch");
    const bool convective = params_.mode == FlowMode::navier_stokes;
    const int nv = velocity_size();
    const double lambda = state(multiplier_index());
    Eigen::VectorXd res = Eigen::VectorXd::Zero(size());

    for (int k = 0; k < mesh_->num_elements(); ++k) {
      const auto& st = ops_.stencil(k);
      const Eigen::VectorXd lc = local_gradient(state, k);
      const auto uk = state.segment(2 * nb_ * k, 2 * nb_);
      const auto& pd = pressure_space_.element_dofs(k);
      Eigen::VectorXd weighted = Eigen::VectorXd::Zero(4 * nb_);
      Eigen::VectorXd own = Eigen::VectorXd::Zero(2 * nb_);
      for (std::size_t q = 0; q < cell_rule_.size(); ++q) {
        const Eigen::VectorXd& phi = cell_values_[q];
        const double w = cell_rule_.weights[q] * dets_[k];
        const Mat2 l = tensor_at(lc, phi);
        const Vec2 v(uk.head(nb_).dot(phi), uk.tail(nb_).dot(phi));
        double qv = 0.0;
        for (std::size_t j = 0; j < pd.size(); ++j) qv += state(nv + pd[j]) * phi(j);

        Mat2 t = stress(params_.law, l) - qv * Mat2::Identity();
        if (convective) {
          t -= 0.5 * v * v.transpose();
          const Vec2 c = 0.5 * l * v;
          for (int i = 0; i < 2; ++i) own.segment(i * nb_, nb_) += w * c(i) * phi;
        }
        const Eigen::Vector4d tv = flatten(t);
        for (int c = 0; c < 4; ++c) weighted.segment(c * nb_, nb_) += w * tv(c) * phi;

        const double trace = l(0, 0) + l(1, 1);
        for (std::size_t j = 0; j < pd.size(); ++j) res(nv + pd[j]) += w * (trace + lambda) * phi(j);
        res(multiplier_index()) += w * qv;
      }
      const Eigen::VectorXd local = ops_.matrix(k).transpose() * weighted;
      for (std::size_t s = 0; s < st.size(); ++s) res.segment(2 * nb_ * st[s], 2 * nb_) += local.segment(2 * nb_ * s, 2 * nb_);
      res.segment(2 * nb_ * k, 2 * nb_) += own - load_[k];
    }

    for (int f = 0; f < mesh_->num_faces(); ++f) {
      const Face& face = mesh_->face(f);
      const FaceData& fd = faces_[f];
      const auto up = state.segment(2 * nb_ * face.plus, 2 * nb_);
      for (std::size_t q = 0; q < fd.weights.size(); ++q) {
        const Eigen::VectorXd& pp = fd.plus_values[q];
        Vec2 jump(up.head(nb_).dot(pp), up.tail(nb_).dot(pp));
        if (face.is_boundary()) {
          jump -= fd.datum[q];
        } else {
          const auto um = state.segment(2 * nb_ * face.minus, 2 * nb_);
          const Eigen::VectorXd& pm = fd.minus_values[q];
          jump -= Vec2(um.head(nb_).dot(pm), um.tail(nb_).dot(pm));
        }
        const Mat2 j = jump * fd.normal.transpose();
        const Vec2 flux = params_.alpha * fd.weights[q] * (stress_shifted(params_.law, shifts[f], j / h_) * fd.normal);
        for (int i = 0; i < 2; ++i) {
          res.segment(2 * nb_ * face.plus + i * nb_, nb_) += flux(i) * pp;
          if (!face.is_boundary()) res.segment(2 * nb_ * face.minus + i * nb_, nb_) -= flux(i) * fd.minus_values[q];
        }
      }
    }
    return res;
  }

  /// Derivative of the residual with the face shifts frozen at `state`.
  SparseMatrix tangent(const Eigen::VectorXd& state) const { return tangent(state, face_shifts(state)); }

  SparseMatrix tangent(const Eigen::VectorXd& state, const std::vector<double>& shifts) const {
    check(state);
    if (static_cast<int>(shifts.size()) != mesh_->num_faces())
      throw std::invalid_argument("DiscreteSystem::tangent: shift count mismatch");
    const bool convective = params_.mode == FlowMode::navier_stokes;
    const int nv = velocity_size();
    const int lam = multiplier_index();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(mesh_->num_elements()) * (4 * 4 * nb_ * nb_ * 4 + 16 * nb_ * nb_) +
                     static_cast<std::size_t>(mesh_->num_faces()) * 16 * nb_ * nb_);

    for (int k = 0; k < mesh_->num_elements(); ++k) {
      const auto& st = ops_.stencil(k);
      const int nst = 2 * nb_ * static_cast<int>(st.size());
      const Eigen::MatrixXd& gk = ops_.matrix(k);
      const Eigen::VectorXd lc = local_gradient(state, k);
      const auto uk = state.segment(2 * nb_ * k, 2 * nb_);
      const auto& pd = pressure_space_.element_dofs(k);
      const int np = static_cast<int>(pd.size());

      Eigen::MatrixXd kvv = Eigen::MatrixXd::Zero(nst, nst);
      Eigen::MatrixXd kvq = Eigen::MatrixXd::Zero(nst, np);
      Eigen::MatrixXd kqv = Eigen::MatrixXd::Zero(np, nst);
      Eigen::VectorXd kqlam = Eigen::VectorXd::Zero(np);
      Eigen::Matrix<double, 4, Eigen::Dynamic> e(4, nst);
      Eigen::Matrix<double, 4, Eigen::Dynamic> dt(4, nst);
      for (std::size_t q = 0; q < cell_rule_.size(); ++q) {
        const Eigen::VectorXd& phi = cell_values_[q];
        const double w = cell_rule_.weights[q] * dets_[k];
        for (int c = 0; c < 4; ++c) e.row(c) = phi.transpose() * gk.middleRows(c * nb_, nb_);
        const Mat2 l = tensor_at(lc, phi);
        dt = stress_tangent(params_.law, l) * e;
        if (convective) {
          const Vec2 v(uk.head(nb_).dot(phi), uk.tail(nb_).dot(phi));
          // d(v_i v_j)/du_{m,b} = (delta_im v_j + v_i delta_jm) phi_b, own block only.
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
              for (int m = 0; m < 2; ++m) {
                const double c = 0.5 * ((i == m ? v(j) : 0.0) + (j == m ? v(i) : 0.0));
                if (c != 0.0) dt.row(2 * i + j).segment(m * nb_, nb_) -= c * phi.transpose();
              }
          // d(1/2 [L v]_i)/du = 1/2 (sum_j dL_ij/du v_j + sum_j L_ij dv_j/du), tested with phi_b.
          for (int i = 0; i < 2; ++i) {
            Eigen::RowVectorXd dconv = 0.5 * (v(0) * e.row(2 * i) + v(1) * e.row(2 * i + 1));
            for (int j = 0; j < 2; ++j) dconv.segment(j * nb_, nb_) += 0.5 * l(i, j) * phi.transpose();
            kvv.middleRows(i * nb_, nb_) += w * phi * dconv;
          }
        }
        kvv.noalias() += w * e.transpose() * dt;
        const Eigen::RowVectorXd trace = e.row(0) + e.row(3);
        // Pressure enters the momentum rows as -(q I, D_h^k z) = -(q, tr G z).
        kvq.noalias() -= w * trace.transpose() * phi.head(np).transpose();
        kqv.noalias() += w * phi.head(np) * trace;
        kqlam += w * phi.head(np);
      }
      auto dof = [&](int local) { return 2 * nb_ * st[local / (2 * nb_)] + local % (2 * nb_); };
      for (int r = 0; r < nst; ++r) {
        const int gr = dof(r);
        for (int c = 0; c < nst; ++c)
          if (kvv(r, c) != 0.0) triplets.emplace_back(gr, dof(c), kvv(r, c));
        for (int j = 0; j < np; ++j) {
          triplets.emplace_back(gr, nv + pd[j], kvq(r, j));
          triplets.emplace_back(nv + pd[j], gr, kqv(j, r));
        }
      }
      for (int j = 0; j < np; ++j) {
        triplets.emplace_back(nv + pd[j], lam, kqlam(j));
        triplets.emplace_back(lam, nv + pd[j], kqlam(j));
      }
    }

    for (int f = 0; f < mesh_->num_faces(); ++f) {
      const Face& face = mesh_->face(f);
      const FaceData& fd = faces_[f];
      const bool inner = !face.is_boundary();
      const auto up = state.segment(2 * nb_ * face.plus, 2 * nb_);
      const int sides = inner ? 2 : 1;
      const int n = 2 * nb_ * sides;
      Eigen::MatrixXd kf = Eigen::MatrixXd::Zero(n, n);
      for (std::size_t q = 0; q < fd.weights.size(); ++q) {
        const Eigen::VectorXd& pp = fd.plus_values[q];
        Vec2 jump(up.head(nb_).dot(pp), up.tail(nb_).dot(pp));
        if (inner) {
          const auto um = state.segment(2 * nb_ * face.minus, 2 * nb_);
          const Eigen::VectorXd& pm = fd.minus_values[q];
          jump -= Vec2(um.head(nb_).dot(pm), um.tail(nb_).dot(pm));
        } else {
          jump -= fd.datum[q];
        }
        const Mat2 j = jump * fd.normal.transpose();
        const Eigen::Matrix4d ta = stress_shifted_tangent(params_.law, shifts[f], j / h_);
        // Q(i,m) = vec(e_i (x) n)^T T_a vec(e_m (x) n)
        Mat2 qm;
        for (int i = 0; i < 2; ++i)
          for (int m = 0; m < 2; ++m) {
            const Mat2 ei = Vec2::Unit(i) * fd.normal.transpose();
            const Mat2 em = Vec2::Unit(m) * fd.normal.transpose();
            qm(i, m) = flatten(ei).dot(ta * flatten(em));
          }
        Eigen::VectorXd trace(nb_ * sides);
        trace.head(nb_) = pp;
        if (inner) trace.tail(nb_) = -fd.minus_values[q];
        const double w = params_.alpha * fd.weights[q] / h_;
        for (int si = 0; si < sides; ++si)
          for (int sm = 0; sm < sides; ++sm) {
            const Eigen::MatrixXd outer = trace.segment(si * nb_, nb_) * trace.segment(sm * nb_, nb_).transpose();
            for (int i = 0; i < 2; ++i)
              for (int m = 0; m < 2; ++m)
                kf.block(si * 2 * nb_ + i * nb_, sm * 2 * nb_ + m * nb_, nb_, nb_) += w * qm(i, m) * outer;
          }
      }
      auto dof = [&](int local) {
        const int elem = local < 2 * nb_ ? face.plus : face.minus;
        return 2 * nb_ * elem + local % (2 * nb_);
      };
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          if (kf(r, c) != 0.0) triplets.emplace_back(dof(r), dof(c), kf(r, c));
    }

    SparseMatrix a(size(), size());
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    return a;
  }

  /// b_h(x, y, z) = 1/2 (z (x) x, G_h^k y) - 1/2 (y (x) x, G_h^k z) with the
  /// homogeneous DG gradient.
  double trilinear_bh(const BrokenField& x, const BrokenField& y, const BrokenField& z) const {
    double s = 0.0;
    for (int k = 0; k < mesh_->num_elements(); ++k) {
      const Eigen::VectorXd gy = ops_.matrix(k) * ops_.gather(y, k);
      const Eigen::VectorXd gz = ops_.matrix(k) * ops_.gather(z, k);
      for (std::size_t q = 0; q < cell_rule_.size(); ++q) {
        const Eigen::VectorXd& phi = cell_values_[q];
        const double w = cell_rule_.weights[q] * dets_[k];
        const Vec2 xv = vector_at(x, k, phi), yv = vector_at(y, k, phi), zv = vector_at(z, k, phi);
        s += 0.5 * w * (zv.dot(tensor_at(gy, phi) * xv) - yv.dot(tensor_at(gz, phi) * xv));
      }
    }
    return s;
  }

 private:
  struct FaceData {
    Vec2 normal;
    std::vector<double> weights;
    std::vector<Eigen::VectorXd> plus_values;
    std::vector<Eigen::VectorXd> minus_values;
    std::vector<Vec2> datum;
  };

  void check(const Eigen::VectorXd& state) const {
    if (state.size() != size()) throw std::invalid_argument("DiscreteSystem: state dimension mismatch");
  }

  Eigen::VectorXd gather(const Eigen::VectorXd& state, int k) const {
    const auto& st = ops_.stencil(k);
    Eigen::VectorXd out(2 * nb_ * static_cast<int>(st.size()));
    for (std::size_t s = 0; s < st.size(); ++s) out.segment(2 * nb_ * s, 2 * nb_) = state.segment(2 * nb_ * st[s], 2 * nb_);
    return out;
  }

  Mat2 tensor_at(const Eigen::VectorXd& coeffs, const Eigen::VectorXd& phi) const {
    Mat2 m;
    for (int c = 0; c < 4; ++c) m(c / 2, c % 2) = coeffs.segment(c * nb_, nb_).dot(phi);
    return m;
  }

  Vec2 vector_at(const BrokenField& f, int k, const Eigen::VectorXd& phi) const {
    const auto b = f.block(k);
    return {b.head(nb_).dot(phi), b.tail(nb_).dot(phi)};
  }

  const Mesh* mesh_;
  SystemParams params_;
  ProblemData data_;
  DGGradient ops_;
  ContinuousSpace pressure_space_;
  QuadratureRule cell_rule_;
  EdgeRule face_rule_;
  int nb_ = 0;
  double h_ = 0.0;
  std::vector<Eigen::VectorXd> cell_values_;
  Eigen::VectorXd mean_weights_;
  std::vector<double> dets_;
  std::vector<Eigen::VectorXd> load_;  // (g, z) per element
  std::vector<FaceData> faces_;
};

}  // namespace pldg
