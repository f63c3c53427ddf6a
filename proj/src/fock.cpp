#include "cvtomo/fock.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace cvtomo {

double hermiticity_error(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const Matrix& m, double tol) {
  return m.rows() == m.cols() && hermiticity_error(m) <= tol;
}

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double DensityMatrix::trace_deviation() const {
  return std::abs(entries_.trace() - Complex(1.0, 0.0));
}

double DensityMatrix::hermiticity_error() const {
  return cvtomo::hermiticity_error(entries_);
}

double DensityMatrix::min_eigenvalue() const {
  return cvtomo::min_eigenvalue(hermitize(entries_));
}

void DensityMatrix::require_physical(double herm_tol, double trace_tol,
                                     double eig_tol) const {
  if (hermiticity_error() > herm_tol)
    throw std::runtime_error("DensityMatrix: not Hermitian within tolerance");
  if (trace_deviation() > trace_tol)
    throw std::runtime_error("DensityMatrix: trace deviates from 1");
  if (min_eigenvalue() < -eig_tol)
    throw std::runtime_error("DensityMatrix: negative eigenvalue");
}

Matrix annihilation_op(FockDim dim) {
  Matrix a = Matrix::Zero(dim.n, dim.n);
  for (int n = 1; n < dim.n; ++n)
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Matrix creation_op(FockDim dim) { return annihilation_op(dim).adjoint(); }

Vector coherent_state(Complex alpha, FockDim dim) {
  Vector c(dim.n);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim.n; ++n)
    c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

Matrix displacement_op(Complex alpha, FockDim dim) {
  const Matrix a = annihilation_op(dim);
  // generator alpha a^dag - conj(alpha) a is skew-Hermitian; i*generator
  // is Hermitian, so exp(generator) = U exp(-i lambda) U^dag.
  const Matrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
  Eigen::SelfAdjointEigenSolver<Matrix> es(Complex(0.0, 1.0) * gen);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("displacement_op: eigendecomposition failed");
  Vector phases(dim.n);
  for (int i = 0; i < dim.n; ++i)
    phases(i) = std::exp(Complex(0.0, -es.eigenvalues()(i)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

DensityMatrix thermal_state(double n_th, FockDim dim) {
  if (n_th < 0.0)
    throw std::invalid_argument("thermal_state: n_th must be >= 0");
  Matrix rho = Matrix::Zero(dim.n, dim.n);
  const double ratio = n_th / (n_th + 1.0);
  double p = 1.0 / (n_th + 1.0);
  for (int k = 0; k < dim.n; ++k) {
    rho(k, k) = p;
    p *= ratio;
  }
  return DensityMatrix(std::move(rho));
}

double thermal_trace_deficit(double n_th, FockDim dim) {
  if (n_th <= 0.0) return 0.0;
  return std::pow(n_th / (n_th + 1.0), dim.n);
}

Matrix parity_op(FockDim dim) {
  Matrix p = Matrix::Zero(dim.n, dim.n);
  for (int n = 0; n < dim.n; ++n) p(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  return p;
}

void hosc_wavefunctions(int n_max, double x, std::span<double> out) {
  if (n_max < 0) throw std::invalid_argument("hosc_wavefunctions: n_max < 0");
  const double psi0 =
      std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  out[0] = psi0;
  if (n_max == 0) return;
  out[1] = std::sqrt(2.0) * x * psi0;
  for (int n = 2; n <= n_max; ++n) {
    out[n] = std::sqrt(2.0 / n) * x * out[n - 1] -
             std::sqrt((n - 1.0) / n) * out[n - 2];
  }
}

double hosc_wavefunction(int n, double x) {
  if (n < 0) throw std::invalid_argument("hosc_wavefunction: n < 0");
  std::vector<double> psi(n + 1);
  hosc_wavefunctions(n, x, psi);
  return psi[n];
}

Complex quadrature_overlap(double theta, int n, double x) {
  return std::exp(Complex(0.0, -n * theta)) * hosc_wavefunction(n, x);
}

}  // namespace cvtomo
