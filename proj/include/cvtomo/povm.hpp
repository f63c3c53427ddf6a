#pragma once

#include <string>
#include <variant>
#include <vector>

#include "cvtomo/types.hpp"

namespace cvtomo {

enum class Scheme { homodyne, heterodyne, wigner };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

/// Settings for binned homodyne detection. The same bin edges are used at
/// every angle; the first/last edge may be -inf/+inf so that no probability
/// mass falls outside the outcome set.
struct HomodyneSettings {
  std::vector<double> angles;     // local-oscillator phases in [0, pi)
  std::vector<double> bin_edges;  // strictly increasing, size >= 2
  double efficiency = 1.0;        // eta in (0, 1]

  int n_bins() const { return static_cast<int>(bin_edges.size()) - 1; }
  void validate() const;
};

/// Uniform nx x np grid of phase-space points covering
/// [-x_max, x_max] x [-p_max, p_max]. Outcomes are ordered row-major:
/// k = ix*np + ip, with alpha_k = x_center(ix) + i*p_center(ip).
struct PhaseSpaceGrid {
  double x_max = 0.0;
  double p_max = 0.0;
  int nx = 0;
  int np = 0;

  int size() const { return nx * np; }
  double dx() const { return 2.0 * x_max / nx; }
  double dp() const { return 2.0 * p_max / np; }
  double cell_area() const { return dx() * dp(); }
  double x_center(int ix) const { return -x_max + (ix + 0.5) * dx(); }
  double p_center(int ip) const { return -p_max + (ip + 0.5) * dp(); }
  Complex center(int k) const {
    return {x_center(k / np), p_center(k % np)};
  }
  void validate() const;
};

/// Heterodyne (Q-function) measurement on a grid, optionally with thermal
/// amplifier noise of mean photon number n_th folded into the operators.
struct HeterodyneSettings {
  PhaseSpaceGrid grid;
  double n_th = 0.0;
  void validate() const;
};

/// Displaced-parity (Wigner) measurement on a grid.
struct WignerSettings {
  PhaseSpaceGrid grid;
  void validate() const;
};

using PovmSettings =
    std::variant<HomodyneSettings, HeterodyneSettings, WignerSettings>;

/// Ordered set of measurement operators with the outcome layout that
/// produced them. Homodyne outcomes are ordered angle-major:
/// k = angle_index * n_bins + bin_index; grid schemes use the grid's
/// row-major order.
struct PovmSet {
  Scheme scheme;
  FockDim dim;
  std::vector<Matrix> operators;
  PovmSettings settings;

  int outcomes() const { return static_cast<int>(operators.size()); }

  /// Checks Hermiticity of every operator (1e-12) and, except for the
  /// wigner scheme whose operators have eigenvalues +-1, positive
  /// semidefiniteness (min eigenvalue >= -1e-10). Throws on violation.
  void validate() const;
};

/// Matrix elements Pi_mn(theta, bin) = int_bin <m|x_theta><x_theta|n> dx,
/// evaluated per entry by adaptive Gauss-Kronrod quadrature (absolute
/// tolerance 1e-10 or better). Infinite edges are truncated where the
/// integrand tail is below 1e-14 (|x| = sqrt(2N) + 6). Hermitian by
/// construction. Throws on an empty bin.
Matrix homodyne_povm(double theta, double x_lo, double x_hi, FockDim dim);

/// Bernoulli-transformed operator compensating detection efficiency eta:
/// the two-index sum over loss orders k with weights
/// B_{n+k,n}(eta) = sqrt(binom(n+k,n) eta^n (1-eta)^k), truncated at the
/// space cutoff. Agrees with the beam-splitter Kraus picture
/// sum_k K_k^dag Pi K_k. eta = 1 returns the input unchanged.
Matrix loss_degrade(const Matrix& pi, double eta, FockDim dim);

/// (cell_area/pi) |alpha><alpha| from the truncated coherent state, so that
/// Tr[Pi rho] approximates the Q-function probability mass of one grid cell.
Matrix heterodyne_povm(Complex alpha, double cell_area, FockDim dim);

/// Noise-compensated heterodyne operator
/// (cell_area/pi) D(alpha) rho_th(n_th) D^dag(alpha). The truncated thermal
/// state is used as-is; keep Tr rho_th(N) >= 1 - 1e-3 (see
/// thermal_trace_deficit). n_th = 0 reduces exactly to heterodyne_povm.
Matrix heterodyne_povm_noisy(Complex alpha, double n_th, double cell_area,
                             FockDim dim);

/// Displaced parity D(alpha) P D^dag(alpha). Eigenvalues are +-1 up to
/// truncation; the 2/pi factor relating it to Wigner values is applied at
/// design-matrix assembly, not here.
Matrix wigner_povm(Complex alpha, FockDim dim);

/// Thermal photon number equivalent to detection efficiency eta: n = 1/eta - 1.
double noise_efficiency_equivalence(double eta);

/// Inverse map eta = 1/(n + 1).
double efficiency_from_thermal(double n_th);

PovmSet build_povm_set(const HomodyneSettings& settings, FockDim dim);
PovmSet build_povm_set(const HeterodyneSettings& settings, FockDim dim);
PovmSet build_povm_set(const WignerSettings& settings, FockDim dim);

}  // namespace cvtomo
