#pragma once

#include "pldg/errors.hpp"
#include "pldg/manufactured.hpp"
#include "pldg/mesh.hpp"
#include "pldg/solver.hpp"
#include "pldg/system.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pldg {

struct RunConfig {
  std::vector<double> p_values{2.25};
  int case_id = 1;
  FlowMode mode = FlowMode::navier_stokes;
  int first_level = 0;
  int last_level = 5;
  double alpha = 2.5;
  double delta = 1e-4;
  int degree = 1;
  ExponentBase case2_base = ExponentBase::beta;
  bool warm_start = false;
  NewtonConfig newton;
  ErrorQuadrature error_quadrature;
};

inline std::string to_string(FlowMode m) { return m == FlowMode::stokes ? "stokes" : "navier-stokes"; }
inline std::string to_string(ExponentBase b) { return b == ExponentBase::beta ? "beta" : "alpha"; }

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"p", c.p_values},
          {"case", c.case_id},
          {"mode", to_string(c.mode)},
          {"levels", {c.first_level, c.last_level}},
          {"alpha", c.alpha},
          {"delta", c.delta},
          {"degree", c.degree},
          {"case2_exponent_base", to_string(c.case2_base)},
          {"warm_start", c.warm_start},
          {"linear_solver", linear_solver_name()},
          {"newton", {{"abs_tol", c.newton.abs_tol},
                      {"rel_tol", c.newton.rel_tol},
                      {"max_iterations", c.newton.max_iterations},
                      {"damping", c.newton.damping}}}};
}

/// Transfers a state from `coarse` to `fine`, where the fine mesh is the red
/// refinement of the coarse one (child 4k+c lies in parent k). Both spaces
/// are nested, so nodal interpolation is exact.
inline Eigen::VectorXd prolongate(const DiscreteSystem& coarse, const Eigen::VectorXd& state, const DiscreteSystem& fine) {
  const Mesh& cm = coarse.mesh();
  const Mesh& fm = fine.mesh();
  if (fm.num_elements() != 4 * cm.num_elements() || coarse.params().degree != fine.params().degree)
    throw std::invalid_argument("prolongate: fine system is not a refinement of the coarse one");
  const BrokenField v = coarse.velocity(state);
  const ContinuousField q = coarse.pressure(state);
  const ReferenceBasis& basis = reference_basis(fine.params().degree);
  BrokenField vf(fm.num_elements(), FieldShape::vector, fine.params().degree);
  ContinuousField qf{Eigen::VectorXd::Zero(fine.pressure_size())};
  for (int k = 0; k < fm.num_elements(); ++k) {
    const int parent = k / 4;
    const ElementMap child = element_map(fm, k);
    const ElementMap pm = element_map(cm, parent);
    const auto& dofs = fine.pressure_space().element_dofs(k);
    for (int a = 0; a < basis.size(); ++a) {
      const Vec2 xi = pm.to_reference(child.to_physical(basis.nodes()[a]));
      const Vec2 w = evaluate_vector(v, parent, xi);
      vf(k, 0, a) = w.x();
      vf(k, 1, a) = w.y();
      qf.coefficients(dofs[a]) = evaluate(coarse.pressure_space(), q, parent, xi);
    }
  }
  return fine.pack(vf, qf, coarse.multiplier(state));
}

/// Solves the manufactured benchmark on levels first..last for one p and
/// returns errors and rates. Newton progress goes to `log` as one line per
/// iteration. A level whose Newton iteration fails is recorded with
/// converged = false and NaN errors.
inline EOCReport run_single(const RunConfig& config, double p, std::ostream* log = nullptr) {
  if (config.first_level < 0 || config.last_level < config.first_level)
    throw std::invalid_argument("run_single: invalid level range");
  const ConstitutiveParams law(p, config.delta);
  const CaseParameters cp = case_parameters(config.case_id, law, config.alpha, config.case2_base);
  const ManufacturedSolution exact(law, config.mode, cp.gamma, cp.eta);

  EOCReport report;
  report.p = p;
  report.config = to_json(config);
  report.config["gamma"] = cp.gamma;
  report.config["eta"] = cp.eta;
  report.quadrature = config.error_quadrature.describe();

  SystemParams sp;
  sp.law = law;
  sp.alpha = config.alpha;
  sp.degree = config.degree;
  sp.mode = config.mode;
  ProblemData data{[&](const Vec2& x) { return exact.body_force(x); }, [&](const Vec2& x) { return exact.velocity(x); }};

  std::optional<Mesh> previous_mesh;
  std::optional<DiscreteSystem> previous_system;
  Eigen::VectorXd previous_state;
  bool previous_ok = false;

  Mesh mesh = build_mesh(config.first_level);
  for (int level = config.first_level; level <= config.last_level; ++level) {
    if (level > config.first_level) mesh = red_refine(*previous_mesh);
    const auto start = std::chrono::steady_clock::now();
    DiscreteSystem system(mesh, sp, data);
    Eigen::VectorXd initial = system.zero_state();
    if (config.warm_start && previous_ok) initial = prolongate(*previous_system, previous_state, system);

    EOCRow row;
    row.level = level;
    row.h = mesh.h_max();
    auto on_iteration = [&](const NewtonIteration& it) {
      if (!log) return;
      char line[160];
      std::snprintf(line, sizeof line, "p=%g level=%d iteration=%d residual=%.6e damping=%.4f\n", p, level, it.iteration,
                    it.residual, it.damping);
      *log << line;
    };
    Eigen::VectorXd solution;
    try {
      const NewtonResult r = newton_solve(system, initial, config.newton, on_iteration);
      solution = r.state;
      row.newton_iterations = r.iterations();
      row.converged = true;
    } catch (const NonConvergenceError& e) {
      row.newton_iterations = e.result.iterations();
      if (log) *log << "p=" << p << " level=" << level << " error=\"" << e.what() << "\"\n";
    } catch (const SingularMatrixError& e) {
      if (log) *log << "p=" << p << " level=" << level << " error=\"" << e.what() << "\"\n";
    } catch (const std::bad_alloc&) {
      if (log) *log << "p=" << p << " level=" << level << " error=\"out of memory in the linear solver\"\n";
    }
    if (row.converged) {
      row.e_q = pressure_error(system.pressure_space(), system.pressure(solution),
                               [&](const Vec2& x) { return exact.pressure(x); }, law.conjugate_exponent(),
                               config.error_quadrature);
      row.e_f = f_error(system.gradient_operator(), system.velocity(solution), law,
                        [&](const Vec2& x) { return exact.sym_gradient(x); }, config.error_quadrature);
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.rows.push_back(row);

    // The previous system references previous_mesh, so replace both together.
    previous_system.reset();
    previous_mesh = mesh;
    if (config.warm_start) previous_system.emplace(*previous_mesh, sp, data);
    previous_state = solution;
    previous_ok = row.converged;
  }
  report.compute_rates();
  return report;
}

inline std::vector<EOCReport> run_series(const RunConfig& config, std::ostream* log = nullptr) {
  std::vector<EOCReport> out;
  for (double p : config.p_values) out.push_back(run_single(config, p, log));
  return out;
}

}  // namespace pldg
