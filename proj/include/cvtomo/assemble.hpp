#pragma once

#include <vector>

#include "cvtomo/povm.hpp"
#include "cvtomo/types.hpp"

namespace cvtomo {

/// Column-stacked vectorization: vec[j*N + i] = rho(i, j), i.e. the second
/// column is placed under the first. Throws on non-square input.
Vector vectorize(const Matrix& rho);

/// Inverse of vectorize. Throws if the length is not a perfect square.
Matrix unvectorize(const Vector& v);

/// Column index of the matrix entry (i, j) under vectorize.
inline int basis_column(int i, int j, int dim) { return j * dim + i; }

/// The N^2 single-entry operators |i><j|, ordered so that entry c pairs
/// with vectorize component c: basis_ops(dim)[basis_column(i,j,N)] = |i><j|.
/// In the row-major labeling Omega_{i*N+j} = |i><j| this is the index map
/// sigma(c) = (c%N)*N + c/N.
std::vector<Matrix> basis_ops(FockDim dim);

/// M x N^2 matrix with A(k, c) = Tr[Pi_k Omega_c] = <j|Pi_k|i> for the
/// (i, j) encoded by column c. Rows follow the PovmSet outcome order.
/// For the wigner scheme each row carries the 2/pi Wigner prefactor so that
/// A vec(rho) predicts Wigner values directly.
struct DesignMatrix {
  Matrix entries;
  FockDim dim;
  Scheme scheme;
  PovmSettings settings;

  int outcomes() const { return static_cast<int>(entries.rows()); }
};

DesignMatrix build_design_matrix(const PovmSet& povms);

enum class Normalization { probabilities, densities, wigner_values };

std::string normalization_name(Normalization n);
Normalization normalization_from_name(const std::string& name);

/// Length-M data vector aligned with a PovmSet's outcome order.
/// sample_count is 0 for exact (non-sampled) data.
struct MeasurementVector {
  RealVector values;
  Normalization tag = Normalization::probabilities;
  long sample_count = 0;
};

/// Wraps already-normalized values (exact probabilities, densities, or
/// Wigner values). Checks length against the PovmSet and, for probability
/// data, that each completeness group (the whole vector for grid schemes,
/// each angle for homodyne) sums to at most 1 + 1e-6.
MeasurementVector build_measurement_vector(const RealVector& values,
                                           Normalization tag,
                                           const PovmSet& povms);

/// Normalizes a sampled histogram (counts / total_samples). total_samples
/// defaults to the histogram sum. Throws on negative counts, an all-zero
/// histogram, or a length mismatch.
MeasurementVector build_measurement_vector(const std::vector<long>& counts,
                                           const PovmSet& povms,
                                           long total_samples = 0);

/// Homodyne variant: one histogram per angle, each normalized by its own
/// total so every angle contributes a probability distribution over bins.
MeasurementVector build_measurement_vector(
    const std::vector<std::vector<long>>& per_angle_counts,
    const PovmSet& povms);

}  // namespace cvtomo
