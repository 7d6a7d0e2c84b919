#pragma once

#include "pldg/constitutive.hpp"
#include "pldg/dgops.hpp"
#include "pldg/femspace.hpp"
#include "pldg/mesh.hpp"
#include "pldg/quadrature.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pldg {

using ScalarFunction = std::function<double(const Vec2&)>;
using TensorFunction = std::function<Mat2(const Vec2&)>;

/// Quadrature degrees for error integrals: elements with a vertex at the
/// origin (where the exact solution is singular) use the higher degree.
struct ErrorQuadrature {
  int regular = 8;
  int singular = 12;

  std::string describe() const {
    return "degree " + std::to_string(singular) + " on elements touching the origin, " + std::to_string(regular) +
           " elsewhere";
  }
};

inline bool touches_origin(const Mesh& mesh, int k) { return origin_vertex(mesh, k) >= 0; }

/// ||q_h - q||_{p'} = (int |q_h - q|^{p'} dx)^{1/p'}.
inline double pressure_error(const ContinuousSpace& space, const ContinuousField& qh, const ScalarFunction& exact,
                             double conjugate_exponent, const ErrorQuadrature& quad = {}) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule regular = triangle_rule(quad.regular);
  const QuadratureRule singular = triangle_rule(quad.singular);
  double s = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const QuadratureRule& rule = touches_origin(mesh, k) ? singular : regular;
    const ElementMap map = element_map(mesh, k);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double diff = evaluate(space, qh, k, rule.points[q]) - exact(map.to_physical(rule.points[q]));
      s += rule.weights[q] * map.det * std::pow(std::abs(diff), conjugate_exponent);
    }
  }
  return std::pow(s, 1.0 / conjugate_exponent);
}

/// ||F(D_h^k v_h) - F(Dv)||_2 with D_h^k v_h = [G_h^k v_h]^sym taken from
/// `ops` (which carries the boundary datum).
inline double f_error(const DGGradient& ops, const BrokenField& vh, const ConstitutiveParams& law,
                      const TensorFunction& exact_sym_gradient, const ErrorQuadrature& quad = {}) {
  const Mesh& mesh = ops.mesh();
  const BrokenField g = ops.gradient(vh);
  const QuadratureRule regular = triangle_rule(quad.regular);
  const QuadratureRule singular = triangle_rule(quad.singular);
  double s = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const QuadratureRule& rule = touches_origin(mesh, k) ? singular : regular;
    const ElementMap map = element_map(mesh, k);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Mat2 dh = sym(evaluate_tensor(g, k, rule.points[q]));
      const Mat2 d = exact_sym_gradient(map.to_physical(rule.points[q]));
      s += rule.weights[q] * map.det * (f_map(law, dh) - f_map(law, d)).squaredNorm();
    }
  }
  return std::sqrt(s);
}

/// EOC_i = log(e_i / e_{i-1}) / log(h_i / h_{i-1}), i = 1..n-1.
inline std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size() || errors.size() < 2) throw std::invalid_argument("eoc: need two or more matching entries");
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!(errors[i] > 0.0) || !(hs[i] > 0.0)) throw std::domain_error("eoc: entries must be positive");
  std::vector<double> out;
  for (std::size_t i = 1; i < errors.size(); ++i) out.push_back(std::log(errors[i] / errors[i - 1]) / std::log(hs[i] / hs[i - 1]));
  return out;
}

/// Least-squares slope of log e against log h.
inline double loglog_slope(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size() || errors.size() < 2) throw std::invalid_argument("loglog_slope: need two or more entries");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    mx += std::log(hs[i]) / n;
    my += std::log(errors[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double dx = std::log(hs[i]) - mx;
    sxy += dx * (std::log(errors[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct EOCRow {
  int level = 0;
  double h = 0.0;
  double e_q = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> eoc_q;
  double e_f = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> eoc_f;
  int newton_iterations = 0;
  double seconds = 0.0;
  bool converged = false;
};

struct EOCReport {
  double p = 0.0;
  std::vector<EOCRow> rows;
  nlohmann::json config;  // echo of the run configuration
  std::string quadrature;

  bool all_converged() const {
    for (const auto& r : rows)
      if (!r.converged) return false;
    return true;
  }

  std::vector<double> hs() const {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.h);
    return out;
  }
  std::vector<double> pressure_errors() const {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.e_q);
    return out;
  }

  /// Fills eoc_q / eoc_f from the stored errors of consecutive rows.
  void compute_rates() {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rows[i].eoc_q.reset();
      rows[i].eoc_f.reset();
      if (i == 0) continue;
      const EOCRow& a = rows[i - 1];
      EOCRow& b = rows[i];
      if (a.e_q > 0.0 && b.e_q > 0.0) b.eoc_q = eoc({a.e_q, b.e_q}, {a.h, b.h})[0];
      if (a.e_f > 0.0 && b.e_f > 0.0) b.eoc_f = eoc({a.e_f, b.e_f}, {a.h, b.h})[0];
    }
  }
};

namespace detail {

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

inline nlohmann::json json_number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
inline nlohmann::json json_optional(const std::optional<double>& v) { return v ? json_number(*v) : nlohmann::json(nullptr); }

}  // namespace detail

/// One row per level: level,h,e_q,eoc_q,e_F,eoc_F,newton_iters,seconds.
inline void write_csv(std::ostream& os, const EOCReport& report) {
  os << "level,h,e_q,eoc_q,e_F,eoc_F,newton_iters,seconds\n";
  for (const auto& r : report.rows) {
    os << r.level << ',' << detail::format_number(r.h) << ',' << detail::format_number(r.e_q) << ','
       << detail::format_optional(r.eoc_q) << ',' << detail::format_number(r.e_f) << ','
       << detail::format_optional(r.eoc_f) << ',' << r.newton_iterations << ',' << detail::format_number(r.seconds)
       << '\n';
  }
}

inline nlohmann::json to_json(const EOCReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"level", r.level},
                    {"h", detail::json_number(r.h)},
                    {"e_q", detail::json_number(r.e_q)},
                    {"eoc_q", detail::json_optional(r.eoc_q)},
                    {"e_F", detail::json_number(r.e_f)},
                    {"eoc_F", detail::json_optional(r.eoc_f)},
                    {"newton_iters", r.newton_iterations},
                    {"seconds", detail::json_number(r.seconds)},
                    {"converged", r.converged}});
  }
  return {{"p", report.p}, {"config", report.config}, {"error_quadrature", report.quadrature}, {"rows", rows}};
}

}  // namespace pldg
