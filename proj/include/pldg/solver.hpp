#pragma once

#include "pldg/system.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#ifdef PLDG_HAVE_UMFPACK
#include <umfpack.h>
#endif

#include <atomic>
#include <cmath>
#include <new>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pldg {

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline bool accurate(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b, double* residual) {
  // Frobenius norm bounds the spectral norm from above.
  *residual = (a * x - b).norm();
  return x.allFinite() && *residual <= 1e-9 * (a.norm() * x.norm() + b.norm());
}

#ifdef PLDG_HAVE_UMFPACK
// Set once UMFPACK has returned an inaccurate solution for a matrix that
// SparseLU then solved; later calls go straight to SparseLU.
inline std::atomic<bool>& umfpack_disabled() {
  static std::atomic<bool> flag{false};
  return flag;
}

// Solves a x = b with UMFPACK; returns the UMFPACK status.
inline int umfpack_solve(const SparseMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
  SparseMatrix c = a;
  c.makeCompressed();
  double control[UMFPACK_CONTROL];
  umfpack_di_defaults(control);
#ifdef UMFPACK_ORDERING_METIS
  // Less fill than the default AMD ordering on the finest levels.
  control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
#endif
  const int n = static_cast<int>(c.rows());
  const int *ap = c.outerIndexPtr(), *ai = c.innerIndexPtr();
  const double* ax = c.valuePtr();
  void *symbolic = nullptr, *numeric = nullptr;
  int status = umfpack_di_symbolic(n, n, ap, ai, ax, &symbolic, control, nullptr);
  if (status == UMFPACK_OK) status = umfpack_di_numeric(ap, ai, ax, symbolic, &numeric, control, nullptr);
  umfpack_di_free_symbolic(&symbolic);
  if (status == UMFPACK_OK) {
    x.resize(n);
    status = umfpack_di_solve(UMFPACK_A, ap, ai, ax, x.data(), b.data(), numeric, control, nullptr);
  }
  umfpack_di_free_numeric(&numeric);
  return status;
}
#endif

}  // namespace detail

/// Name of the factorization used by linear_solve.
inline std::string linear_solver_name() {
#ifdef PLDG_HAVE_UMFPACK
  if (!detail::umfpack_disabled()) return "UMFPACK";
#endif
  return "SparseLU";
}

/// Sparse direct solve. Uses UMFPACK when available and Eigen's SparseLU
/// (COLAMD ordering) otherwise. Every solution is checked against
/// ||Ax - b|| <= 1e-9 (||A|| ||x|| + ||b||); an UMFPACK result failing the
/// check is recomputed with SparseLU. Throws SingularMatrixError if the
/// factorization fails or the check fails, and std::bad_alloc if UMFPACK
/// runs out of memory (SparseLU would need more).
inline Eigen::VectorXd linear_solve(const SparseMatrix& a, const Eigen::VectorXd& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw std::invalid_argument("linear_solve: dimension mismatch");
  double r = 0.0;
#ifdef PLDG_HAVE_UMFPACK
  if (!detail::umfpack_disabled()) {
    Eigen::VectorXd x;
    const int status = detail::umfpack_solve(a, b, x);
    if (status == UMFPACK_ERROR_out_of_memory) throw std::bad_alloc();
    if (status == UMFPACK_OK && detail::accurate(a, x, b, &r)) return x;
  }
#endif
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) throw SingularMatrixError("linear_solve: factorization failed: " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw SingularMatrixError("linear_solve: solve failed");
  if (!detail::accurate(a, x, b, &r)) {
    std::ostringstream msg;
    msg << "linear_solve: residual " << r << " exceeds tolerance (numerically singular)";
    throw SingularMatrixError(msg.str());
  }
#ifdef PLDG_HAVE_UMFPACK
  detail::umfpack_disabled() = true;
#endif
  return x;
}

struct NewtonConfig {
  double abs_tol = 1e-8;
  double rel_tol = 1e-10;
  int max_iterations = 50;
  bool damping = true;
  int max_halvings = 40;  // the tangent at v = 0 scales like delta^{p-2}, so first steps can be tiny
};

struct NewtonIteration {
  int iteration = 0;
  double residual = 0.0;  // ||F(x_n)||_2 after the step
  double damping = 1.0;   // accepted step length
};

struct NewtonResult {
  Eigen::VectorXd state;
  std::vector<NewtonIteration> log;  // entry 0 is the initial state
  bool converged = false;

  int iterations() const { return static_cast<int>(log.size()) - 1; }
  double final_residual() const { return log.empty() ? 0.0 : log.back().residual; }
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, NewtonResult partial)
      : std::runtime_error(what), result(std::move(partial)) {}
  NewtonResult result;
};

using IterationCallback = std::function<void(const NewtonIteration&)>;

/// Newton's method on F(x) = 0, stopping when ||F|| <= abs_tol or
/// ||F|| <= rel_tol ||F(x_0)||. With damping, the step is halved until the
/// residual norm does not increase; if no such step length is found within
/// max_halvings the iteration fails.
template <class Residual, class Jacobian>
NewtonResult newton_solve(Residual&& residual, Jacobian&& jacobian, Eigen::VectorXd x, const NewtonConfig& config,
                          const IterationCallback& on_iteration = {}) {
  if (!(config.abs_tol > 0.0) || !(config.rel_tol > 0.0)) throw std::invalid_argument("newton_solve: tolerances must be positive");
  NewtonResult out;
  Eigen::VectorXd f = residual(x);
  double norm = f.norm();
  const double target = std::max(config.abs_tol, config.rel_tol * norm);
  auto record = [&](int it, double r, double lambda) {
    out.log.push_back({it, r, lambda});
    if (on_iteration) on_iteration(out.log.back());
  };
  record(0, norm, 0.0);
  for (int it = 1; it <= config.max_iterations && norm > target; ++it) {
    const Eigen::VectorXd dx = linear_solve(jacobian(x), -f);
    double lambda = 1.0;
    Eigen::VectorXd trial = x + dx;
    Eigen::VectorXd ft = residual(trial);
    double nt = ft.norm();
    if (config.damping) {
      int halvings = 0;
      while (!(nt <= norm) && halvings < config.max_halvings) {
        lambda *= 0.5;
        ++halvings;
        trial = x + lambda * dx;
        ft = residual(trial);
        nt = ft.norm();
      }
      if (!(nt <= norm)) {
        out.state = x;
        throw NonConvergenceError("newton_solve: line search failed to reduce the residual", out);
      }
    }
    x = std::move(trial);
    f = std::move(ft);
    norm = nt;
    record(it, norm, lambda);
  }
  out.state = std::move(x);
  out.converged = norm <= target;
  if (!out.converged) {
    std::ostringstream msg;
    msg << "newton_solve: no convergence after " << config.max_iterations << " iterations, residual " << norm;
    throw NonConvergenceError(msg.str(), out);
  }
  return out;
}

/// Newton on a DiscreteSystem; the tangent freezes the face shifts.
inline NewtonResult newton_solve(const DiscreteSystem& system, Eigen::VectorXd initial, const NewtonConfig& config = {},
                                 const IterationCallback& on_iteration = {}) {
  return newton_solve([&](const Eigen::VectorXd& x) { return system.residual(x); },
                      [&](const Eigen::VectorXd& x) { return system.tangent(x); }, std::move(initial), config,
                      on_iteration);
}

}  // namespace pldg
