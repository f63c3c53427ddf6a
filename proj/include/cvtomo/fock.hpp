#pragma once

#include <span>

#include "cvtomo/types.hpp"

namespace cvtomo {

/// Ladder operator a with a|n> = sqrt(n)|n-1>, so entry (n-1, n) = sqrt(n).
Matrix annihilation_op(FockDim dim);

/// a^dagger.
Matrix creation_op(FockDim dim);

/// Truncated coherent-state amplitudes c_n = e^{-|alpha|^2/2} alpha^n/sqrt(n!).
/// Not renormalized: the norm deficit equals the truncated Poisson tail.
Vector coherent_state(Complex alpha, FockDim dim);

/// exp(alpha a^dagger - conj(alpha) a), computed by diagonalizing the
/// Hermitian generator i(alpha a^dagger - conj(alpha) a). Unitary up to
/// truncation error; accurate for |alpha|^2 well inside the cutoff.
Matrix displacement_op(Complex alpha, FockDim dim);

/// Thermal state with mean photon number n_th: diagonal entries
/// p_k = n_th^k / (n_th+1)^{k+1}. Not renormalized after truncation.
DensityMatrix thermal_state(double n_th, FockDim dim);

/// Trace lost to truncation for thermal_state(n_th, dim); equals the
/// geometric tail (n_th/(n_th+1))^N.
double thermal_trace_deficit(double n_th, FockDim dim);

/// Photon-number parity diag((-1)^n).
Matrix parity_op(FockDim dim);

/// Normalized harmonic-oscillator eigenfunction psi_n(x) in the position
/// basis with vacuum variance <x^2> = 1/2, i.e. psi_0(x) = pi^{-1/4}
/// e^{-x^2/2}. Evaluated with the normalized three-term recurrence
///   psi_n = sqrt(2/n) x psi_{n-1} - sqrt((n-1)/n) psi_{n-2},
/// which stays finite where the raw Hermite form 2^n n! would overflow.
double hosc_wavefunction(int n, double x);

/// Fills out[0..n] with psi_0(x) .. psi_n(x) in one recurrence pass.
void hosc_wavefunctions(int n_max, double x, std::span<double> out);

/// Quadrature-eigenstate overlap <x_theta|n> = e^{-i n theta} psi_n(x).
Complex quadrature_overlap(double theta, int n, double x);

}  // namespace cvtomo
