#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "cvtomo/assemble.hpp"
#include "cvtomo/types.hpp"

namespace cvtomo {

struct SolverConfig {
  int max_iters = 20000;
  double eps_rel = 1e-9;    // relative objective stall per iteration
  int stall_window = 10;    // consecutive stalled iterations before stopping
  double eps_abs = 1e-16;   // objective below this counts as solved exactly
  double eps_feas = 1e-10;  // feasibility tolerance of the returned state
  int power_iters = 30;     // power-iteration steps for the Lipschitz constant
  double power_tol = 1e-6;
  double step_scale = 1.0;         // multiplies the 1/L step
  double backtrack_shrink = 0.5;   // used if power iteration stalls
  bool adaptive_restart = true;
  int restart_min_gap = 10;        // iterations between adaptive restarts
  std::optional<Matrix> init;      // feasible start; default is I/N

  // invoked once per iteration with the accepted objective value
  std::function<void(int iter, double objective)> progress;

  void validate() const;
};

struct ReconstructionResult {
  DensityMatrix rho;
  double objective = 0.0;      // final ||A vec(rho) - b||^2
  double residual_norm = 0.0;  // sqrt(objective)
  int iterations = 0;
  bool converged = false;
  double t_build = 0.0;  // seconds spent building operators/design matrix
  double t_solve = 0.0;  // seconds spent in the solver
};

/// Euclidean projection of v onto the probability simplex
/// {x : x >= 0, sum x = 1}.
RealVector simplex_project(const RealVector& v);

/// Frobenius-nearest density matrix: eigendecompose, project the spectrum
/// onto the probability simplex, recompose. Throws if the input deviates
/// from Hermitian by more than 1e-9.
DensityMatrix spectrahedron_project(const Matrix& h);

/// Objective ||A vec(X) - b||^2. The product A vec(X) is real for Hermitian
/// X up to rounding; imaginary parts above 1e-9 raise an error.
double least_squares_objective(const DesignMatrix& a,
                               const MeasurementVector& b, const Matrix& x);

/// Gradient 2 A^dag (A vec(X) - b) reshaped to a matrix and Hermitized;
/// asymmetry beyond 1e-9 raises an error.
Matrix least_squares_gradient(const DesignMatrix& a,
                              const MeasurementVector& b, const Matrix& x);

/// Solves  min ||A vec(rho) - b||^2  over density matrices by monotone
/// FISTA with adaptive restart, stepping 1/L with L = 2 sigma_max(A)^2 from
/// power iteration (backtracking line search as fallback). Stops when the
/// relative objective change stays below eps_rel for stall_window
/// consecutive iterations, or at max_iters (converged = false; the best
/// iterate is still returned). The returned state is feasible
/// unconditionally.
ReconstructionResult reconstruct(const DesignMatrix& a,
                                 const MeasurementVector& b,
                                 const SolverConfig& config = {});

struct CertificateReport {
  bool passed = false;
  int trials = 0;
  int objective_violations = 0;    // f(rho_hat) > f(rho_r) + tol
  int variational_violations = 0;  // <grad f, rho_r - rho_hat> < -tol
  int first_violation = -1;
  double worst_objective_margin = 0.0;    // min over trials of f(r) - f(hat)
  double worst_variational_margin = 0.0;  // min over trials of the inner product
};

/// Samples `trials` random density matrices (Ginibre construction, seeded)
/// and checks the two optimality conditions of a converged solution:
/// no sampled feasible point beats the objective beyond
/// 1e-8 (1 + f), and the variational inequality
/// <grad f(rho_hat), rho_r - rho_hat> >= -1e-6 holds.
CertificateReport certify_optimality(const ReconstructionResult& result,
                                     const DesignMatrix& a,
                                     const MeasurementVector& b, int trials,
                                     std::uint64_t seed = 20240901);

}  // namespace cvtomo
