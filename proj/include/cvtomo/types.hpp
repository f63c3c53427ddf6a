#pragma once

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace cvtomo {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Truncation dimension of the Fock space (number states |0>..|n-1>).
struct FockDim {
  explicit FockDim(int dim) : n(dim) {
    if (dim < 1) throw std::invalid_argument("FockDim: dimension must be >= 1");
  }
  int n;
  bool operator==(const FockDim&) const = default;
};

/// max_ij |m(i,j) - conj(m(j,i))|
double hermiticity_error(const Matrix& m);

bool is_hermitian(const Matrix& m, double tol = 1e-12);

/// (m + m^dagger) / 2
Matrix hermitize(const Matrix& m);

/// Smallest eigenvalue; input is assumed Hermitian.
double min_eigenvalue(const Matrix& m);

/// N x N complex matrix meant to satisfy the density-matrix conditions
/// (Hermitian, unit trace, positive semidefinite). Construction stores the
/// entries as-is: truncated thermal and coherent constructions deliberately
/// keep their trace/norm deficit so the caller can see the truncation error.
/// Call require_physical() at the points where the conditions must hold.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols())
      throw std::invalid_argument("DensityMatrix: matrix must be square");
  }

  const Matrix& matrix() const { return entries_; }
  int dim() const { return static_cast<int>(entries_.rows()); }

  double trace_deviation() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;

  /// Throws std::runtime_error if any of the three conditions is violated
  /// beyond its tolerance.
  void require_physical(double herm_tol = 1e-12, double trace_tol = 1e-9,
                        double eig_tol = 1e-9) const;

 private:
  Matrix entries_;
};

}  // namespace cvtomo
