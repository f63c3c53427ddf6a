#include "cvtomo/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <vector>

#include "cvtomo/rng.hpp"

namespace cvtomo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Re Tr[x^dag y]
double frob_inner_real(const Matrix& x, const Matrix& y) {
  return x.conjugate().cwiseProduct(y).sum().real();
}

double objective_impl(const Matrix& am, const RealVector& b, const Matrix& x,
                      RealVector* residual_out) {
  Eigen::Map<const Vector> vx(x.data(), x.size());
  const Vector ax = am * vx;
  if (ax.imag().cwiseAbs().maxCoeff() > 1e-9)
    throw std::runtime_error(
        "least squares: A vec(X) has a non-negligible imaginary part");
  RealVector r = ax.real() - b;
  const double f = r.squaredNorm();
  if (residual_out) *residual_out = std::move(r);
  return f;
}

Matrix gradient_impl(const Matrix& am, const RealVector& residual, int n) {
  const Vector g = 2.0 * (am.adjoint() * residual.cast<Complex>());
  Matrix grad = Eigen::Map<const Matrix>(g.data(), n, n);
  if ((grad - grad.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::runtime_error("least squares: gradient asymmetry beyond 1e-9");
  return hermitize(grad);
}

// Largest eigenvalue of A^dag A by power iteration, deterministic start.
double sigma_max_squared(const Matrix& am, int iters, double tol,
                         bool* converged) {
  Xoshiro256 rng(0x9d2c5680u);
  Vector v(am.cols());
  for (int i = 0; i < v.size(); ++i) v(i) = Complex(rng.normal(), rng.normal());
  v.normalize();
  double lam = 0.0;
  double lam_prev = -1.0;
  *converged = false;
  for (int it = 0; it < iters; ++it) {
    const Vector w = am.adjoint() * (am * v);
    lam = v.dot(w).real();
    const double wn = w.norm();
    if (wn == 0.0) {
      *converged = true;
      return 0.0;
    }
    v = w / wn;
    if (it > 0 && std::abs(lam - lam_prev) <= tol * std::abs(lam)) {
      *converged = true;
      break;
    }
    lam_prev = lam;
  }
  return std::max(lam, 0.0);
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iters < 1)
    throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
  if (!(eps_rel > 0.0) || !(eps_feas > 0.0) || !(power_tol > 0.0))
    throw std::invalid_argument("SolverConfig: tolerances must be positive");
  if (stall_window < 1)
    throw std::invalid_argument("SolverConfig: stall_window must be >= 1");
  if (eps_abs < 0.0 || restart_min_gap < 0)
    throw std::invalid_argument("SolverConfig: bad eps_abs/restart_min_gap");
  if (!(step_scale > 0.0))
    throw std::invalid_argument("SolverConfig: step_scale must be positive");
  if (!(backtrack_shrink > 0.0) || backtrack_shrink >= 1.0)
    throw std::invalid_argument("SolverConfig: backtrack_shrink not in (0,1)");
}

RealVector simplex_project(const RealVector& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = u[0] - 1.0;
  for (int j = 0; j < n; ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / (j + 1);
    if (u[j] - candidate > 0.0) shift = candidate;
  }
  RealVector out(n);
  for (int i = 0; i < n; ++i) out(i) = std::max(0.0, v(i) - shift);
  return out;
}

DensityMatrix spectrahedron_project(const Matrix& h) {
  if (h.rows() != h.cols())
    throw std::invalid_argument("spectrahedron_project: matrix must be square");
  if (hermiticity_error(h) > 1e-9)
    throw std::invalid_argument(
        "spectrahedron_project: input deviates from Hermitian beyond 1e-9");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectrahedron_project: eigendecomposition failed");
  const RealVector lam = simplex_project(es.eigenvalues());
  Matrix out = es.eigenvectors() * lam.cast<Complex>().asDiagonal() *
               es.eigenvectors().adjoint();
  return DensityMatrix(hermitize(out));
}

double least_squares_objective(const DesignMatrix& a,
                               const MeasurementVector& b, const Matrix& x) {
  if (a.entries.rows() != b.values.size() || a.entries.cols() != x.size())
    throw std::invalid_argument("least_squares_objective: dimension mismatch");
  return objective_impl(a.entries, b.values, x, nullptr);
}

Matrix least_squares_gradient(const DesignMatrix& a,
                              const MeasurementVector& b, const Matrix& x) {
  if (a.entries.rows() != b.values.size() || a.entries.cols() != x.size())
    throw std::invalid_argument("least_squares_gradient: dimension mismatch");
  RealVector r;
  objective_impl(a.entries, b.values, x, &r);
  return gradient_impl(a.entries, r, a.dim.n);
}

ReconstructionResult reconstruct(const DesignMatrix& a,
                                 const MeasurementVector& b,
                                 const SolverConfig& config) {
  config.validate();
  const Matrix& am = a.entries;
  const RealVector& bv = b.values;
  const int n = a.dim.n;
  if (am.rows() != bv.size())
    throw std::invalid_argument("reconstruct: data/design row mismatch");
  if (am.cols() != static_cast<long>(n) * n)
    throw std::invalid_argument("reconstruct: design column count is not N^2");
  if (!bv.allFinite())
    throw std::invalid_argument("reconstruct: non-finite measurement data");

  const auto t0 = Clock::now();

  bool power_ok = false;
  const double s2 =
      sigma_max_squared(am, config.power_iters, config.power_tol, &power_ok);
  const double lipschitz = 2.0 * s2;
  const bool backtracking = !power_ok || !(lipschitz > 0.0);
  double step = backtracking ? 1.0 : config.step_scale / lipschitz;

  Matrix x = config.init
                 ? spectrahedron_project(hermitize(*config.init)).matrix()
                 : Matrix::Identity(n, n) / static_cast<double>(n);
  Matrix y = x;
  double momentum = 1.0;

  // A vec(.) images of the tracked iterates; extrapolation is linear, so
  // the image of y is combined rather than recomputed, leaving two matrix
  // products per iteration. Refreshed periodically against fp drift.
  const auto forward = [&](const Matrix& m) {
    Eigen::Map<const Vector> vm(m.data(), m.size());
    Vector am_v = am * vm;
    if (am_v.imag().cwiseAbs().maxCoeff() > 1e-9)
      throw std::runtime_error(
          "least squares: A vec(X) has a non-negligible imaginary part");
    return am_v;
  };
  const auto value_of = [&](const Vector& image) {
    return (image.real() - bv).squaredNorm();
  };

  Vector ax = forward(x);
  Vector ay = ax;
  double f_x = value_of(ax);

  int stall = 0;
  int iterations = 0;
  bool converged = false;
  int last_restart = 0;

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    iterations = iter;

    if (iter % 512 == 0) {  // drift refresh
      ax = forward(x);
      ay = forward(y);
      f_x = value_of(ax);
    }

    const RealVector residual = ay.real() - bv;
    const double f_y = residual.squaredNorm();
    const Matrix grad = gradient_impl(am, residual, n);

    Matrix z;
    Vector az;
    double f_z = 0.0;
    while (true) {
      z = spectrahedron_project(y - step * grad).matrix();
      az = forward(z);
      f_z = value_of(az);
      if (!backtracking) break;
      const Matrix d = z - y;
      const double model =
          f_y + frob_inner_real(grad, d) + d.squaredNorm() / (2.0 * step);
      if (f_z <= model + 1e-12 || step < 1e-18) break;
      step *= config.backtrack_shrink;
    }

    // monotone step: keep the previous iterate when the candidate is worse
    const bool accept = f_z <= f_x;
    const Matrix x_new = accept ? z : x;
    const Vector& ax_new = accept ? az : ax;
    const double f_new = accept ? f_z : f_x;

    const bool restart =
        config.adaptive_restart &&
        iter - last_restart >= config.restart_min_gap &&
        (!accept || frob_inner_real(grad, x_new - x) > 0.0);
    if (restart) last_restart = iter;
    const double momentum_next =
        restart ? 1.0 : 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    if (restart) {
      y = x_new;
      ay = ax_new;
    } else {
      const double w_z = momentum / momentum_next;
      const double w_prev = (momentum - 1.0) / momentum_next;
      y = x_new + w_z * (z - x_new) + w_prev * (x_new - x);
      ay = ax_new + w_z * (az - ax_new) + w_prev * (ax_new - ax);
    }

    const double rel = (f_x - f_new) / std::max(f_x, 1e-300);
    stall = std::abs(rel) < config.eps_rel ? stall + 1 : 0;

    x = x_new;
    ax = ax_new;
    f_x = f_new;
    momentum = momentum_next;
    if (config.progress) config.progress(iter, f_x);

    if (stall >= config.stall_window || f_x <= config.eps_abs) {
      converged = true;
      break;
    }
  }

  // feasibility is unconditional, even on max_iters exit
  DensityMatrix rho = spectrahedron_project(hermitize(x));
  rho.require_physical(1e-12, std::min(config.eps_feas, 1e-9), 1e-9);
  const double f_final = objective_impl(am, bv, rho.matrix(), nullptr);

  ReconstructionResult result;
  result.rho = std::move(rho);
  result.objective = f_final;
  result.residual_norm = std::sqrt(f_final);
  result.iterations = iterations;
  result.converged = converged;
  result.t_solve = seconds_since(t0);
  return result;
}

CertificateReport certify_optimality(const ReconstructionResult& result,
                                     const DesignMatrix& a,
                                     const MeasurementVector& b, int trials,
                                     std::uint64_t seed) {
  const Matrix& rho_hat = result.rho.matrix();
  const int n = a.dim.n;
  const double f_hat = least_squares_objective(a, b, rho_hat);
  const Matrix grad = least_squares_gradient(a, b, rho_hat);

  CertificateReport report;
  report.trials = trials;
  report.worst_objective_margin = std::numeric_limits<double>::infinity();
  report.worst_variational_margin = std::numeric_limits<double>::infinity();

  Xoshiro256 rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
    Matrix rho_r = g * g.adjoint();
    rho_r /= rho_r.trace().real();

    const double f_r = least_squares_objective(a, b, rho_r);
    const bool objective_ok = f_hat <= f_r + 1e-8 * (1.0 + f_r);
    const double variational = frob_inner_real(grad, rho_r - rho_hat);
    const bool variational_ok = variational >= -1e-6;

    report.worst_objective_margin =
        std::min(report.worst_objective_margin, f_r - f_hat);
    report.worst_variational_margin =
        std::min(report.worst_variational_margin, variational);
    if (!objective_ok) ++report.objective_violations;
    if (!variational_ok) ++report.variational_violations;
    if ((!objective_ok || !variational_ok) && report.first_violation < 0)
      report.first_violation = trial;
  }
  report.passed =
      report.objective_violations == 0 && report.variational_violations == 0;
  return report;
}

}  // namespace cvtomo
