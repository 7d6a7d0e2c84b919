#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pldg {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// An edge of the triangulation. `plus` always exists; `minus` is -1 on the
/// boundary. For interior faces `plus` is the element with the larger index
/// and `normal` is the outward unit normal of `plus` (it points from K+ into
/// K-). On boundary faces `normal` is the outward normal of the domain.
struct Face {
  int plus = -1;
  int minus = -1;
  int local_plus = -1;   // local edge id of the face in `plus`
  int local_minus = -1;  // local edge id of the face in `minus`
  std::array<int, 2> vertices{};
  Vec2 normal = Vec2::Zero();
  double length = 0.0;

  bool is_boundary() const { return minus < 0; }
};

/// Parametrization of a face and of its traces in the adjacent elements.
struct FaceGeometry {
  double length = 0.0;
  Vec2 normal = Vec2::Zero();
  int plus = -1;
  int minus = -1;
  Vec2 start = Vec2::Zero();
  Vec2 end = Vec2::Zero();

  Vec2 point(double t) const { return start + t * (end - start); }
};

/// Conforming triangulation of a polygon. Triangles are counterclockwise and
/// local edge e is the edge opposite local vertex e.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles, int level = 0)
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)), level_(level) {
    build_faces();
  }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(triangles_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int level() const { return level_; }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Face>& faces() const { return faces_; }
  const Face& face(int id) const { return faces_.at(id); }
  const Vec2& vertex(int id) const { return vertices_.at(id); }
  const std::array<int, 3>& triangle(int k) const { return triangles_.at(k); }
  /// Face ids of element k, indexed by local edge.
  const std::array<int, 3>& element_faces(int k) const { return element_faces_.at(k); }

  int num_interior_faces() const {
    return static_cast<int>(std::count_if(faces_.begin(), faces_.end(),
                                          [](const Face& f) { return !f.is_boundary(); }));
  }
  int num_boundary_faces() const { return num_faces() - num_interior_faces(); }

  /// Element across local edge e of element k, or -1 on the boundary.
  int neighbor(int k, int e) const {
    const Face& f = faces_[element_faces_[k][e]];
    if (f.is_boundary()) return -1;
    return f.plus == k ? f.minus : f.plus;
  }

  /// Local edge endpoints (global vertex ids) in counterclockwise order.
  std::array<int, 2> edge_vertices(int k, int e) const {
    const auto& t = triangles_[k];
    return {t[(e + 1) % 3], t[(e + 2) % 3]};
  }

  /// Outward unit normal of element k on its local edge e.
  Vec2 outward_normal(int k, int e) const {
    const auto [a, b] = edge_vertices(k, e);
    const Vec2 d = vertices_[b] - vertices_[a];
    return Vec2(d.y(), -d.x()).normalized();
  }

  double area(int k) const {
    const auto& t = triangles_[k];
    const Vec2 a = vertices_[t[1]] - vertices_[t[0]];
    const Vec2 b = vertices_[t[2]] - vertices_[t[0]];
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
  }

  /// Longest edge of element k.
  double diameter(int k) const {
    const auto& t = triangles_[k];
    double d = 0.0;
    for (int e = 0; e < 3; ++e) d = std::max(d, (vertices_[t[(e + 1) % 3]] - vertices_[t[e]]).norm());
    return d;
  }

  double inradius(int k) const {
    const auto& t = triangles_[k];
    double perimeter = 0.0;
    for (int e = 0; e < 3; ++e) perimeter += (vertices_[t[(e + 1) % 3]] - vertices_[t[e]]).norm();
    return 2.0 * area(k) / perimeter;
  }

  double circumradius(int k) const {
    const auto& t = triangles_[k];
    const double a = (vertices_[t[1]] - vertices_[t[2]]).norm();
    const double b = (vertices_[t[2]] - vertices_[t[0]]).norm();
    const double c = (vertices_[t[0]] - vertices_[t[1]]).norm();
    return a * b * c / (4.0 * area(k));
  }

  /// Local mesh size h_K = diam(K).
  double element_size(int k) const { return diameter(k); }

  /// Global mesh size h = max_K h_K. Every h-scaling in the scheme uses it.
  double h_max() const {
    double h = 0.0;
    for (int k = 0; k < num_elements(); ++k) h = std::max(h, element_size(k));
    return h;
  }

  double h_min() const {
    double h = std::numeric_limits<double>::infinity();
    for (int k = 0; k < num_elements(); ++k) h = std::min(h, element_size(k));
    return h;
  }

  /// max_K diameter / inradius.
  double chunkiness() const {
    double c = 0.0;
    for (int k = 0; k < num_elements(); ++k) c = std::max(c, diameter(k) / inradius(k));
    return c;
  }

  double total_area() const {
    double s = 0.0;
    for (int k = 0; k < num_elements(); ++k) s += area(k);
    return s;
  }

  FaceGeometry face_geometry(int id) const {
    if (id < 0 || id >= num_faces()) throw std::out_of_range("face_geometry: invalid face id");
    const Face& f = faces_[id];
    // Orient the parametrization counterclockwise with respect to `plus`.
    const auto [a, b] = edge_vertices(f.plus, f.local_plus);
    return {f.length, f.normal, f.plus, f.minus, vertices_[a], vertices_[b]};
  }

  /// Plain-text dump: "v x y" and "t i j k" lines.
  void write(std::ostream& os) const {
    os.precision(17);
    for (const auto& v : vertices_) os << "v " << v.x() << ' ' << v.y() << '\n';
    for (const auto& t : triangles_) os << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }

 private:
  void build_faces() {
    faces_.clear();
    element_faces_.assign(triangles_.size(), {-1, -1, -1});
    std::map<std::pair<int, int>, int> lookup;
    for (int k = 0; k < num_elements(); ++k) {
      if (area(k) <= 0.0) throw std::invalid_argument("Mesh: triangle is degenerate or clockwise");
      for (int e = 0; e < 3; ++e) {
        const auto [a, b] = edge_vertices(k, e);
        const std::pair<int, int> key = std::minmax(a, b);
        auto it = lookup.find(key);
        if (it == lookup.end()) {
          Face f;
          f.plus = k;
          f.local_plus = e;
          f.vertices = {a, b};
          f.length = (vertices_[b] - vertices_[a]).norm();
          f.normal = outward_normal(k, e);
          lookup.emplace(key, num_faces());
          element_faces_[k][e] = num_faces();
          faces_.push_back(f);
        } else {
          Face& f = faces_[it->second];
          if (!f.is_boundary()) throw std::invalid_argument("Mesh: edge shared by more than two triangles");
          // Elements are visited in increasing order, so k is the larger index.
          f.minus = f.plus;
          f.local_minus = f.local_plus;
          f.plus = k;
          f.local_plus = e;
          f.normal = outward_normal(k, e);
          element_faces_[k][e] = it->second;
        }
      }
    }
  }

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Face> faces_;
  std::vector<std::array<int, 3>> element_faces_;
  int level_ = 0;
};

/// Local index of the vertex of element k at the origin, or -1.
inline int origin_vertex(const Mesh& mesh, int k) {
  const auto& t = mesh.triangle(k);
  for (int i = 0; i < 3; ++i)
    if (mesh.vertex(t[i]).norm() < 1e-14) return i;
  return -1;
}

/// The square (-1,1)^2 as an n x n grid of squares (n even), each cut along
/// the diagonal parallel to the quadrant diagonal through the origin, so the
/// orientation changes between quadrants. The origin is a mesh vertex and no
/// triangle has more than one boundary edge.
inline Mesh build_grid_mesh(int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("build_grid_mesh: n must be even and positive");
  std::vector<Vec2> vertices;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) vertices.emplace_back(-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n);
  auto id = [n](int i, int j) { return (n + 1) * j + i; };
  std::vector<std::array<int, 3>> triangles;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      const bool rising = (2 * i + 1 - n) * (2 * j + 1 - n) > 0;
      if (rising) {
        triangles.push_back({a, b, c});
        triangles.push_back({a, c, d});
      } else {
        triangles.push_back({a, b, d});
        triangles.push_back({b, c, d});
      }
    }
  }
  return Mesh(std::move(vertices), std::move(triangles), 0);
}

/// Level-0 mesh: 4 x 4 squares of side 1/2, 32 triangles, h_0 = 1/sqrt(2).
inline Mesh build_initial_mesh() { return build_grid_mesh(4); }

/// Uniform red refinement: each triangle is split into four congruent
/// children by its edge midpoints. Children of element k are 4k..4k+3
/// (three corner children by local vertex, then the interior one).
inline Mesh red_refine(const Mesh& m) {
  std::vector<Vec2> vertices = m.vertices();
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const std::pair<int, int> key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int id = static_cast<int>(vertices.size());
    vertices.push_back(0.5 * (m.vertex(a) + m.vertex(b)));
    midpoint.emplace(key, id);
    return id;
  };
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(4 * m.num_elements());
  for (const auto& t : m.triangles()) {
    const int m01 = mid(t[0], t[1]);
    const int m12 = mid(t[1], t[2]);
    const int m20 = mid(t[2], t[0]);
    triangles.push_back({t[0], m01, m20});
    triangles.push_back({m01, t[1], m12});
    triangles.push_back({m20, m12, t[2]});
    triangles.push_back({m01, m12, m20});
  }
  return Mesh(std::move(vertices), std::move(triangles), m.level() + 1);
}

/// Initial mesh refined `level` times.
inline Mesh build_mesh(int level) {
  if (level < 0) throw std::invalid_argument("build_mesh: negative level");
  Mesh m = build_initial_mesh();
  for (int i = 0; i < level; ++i) m = red_refine(m);
  return m;
}

}  // namespace pldg
