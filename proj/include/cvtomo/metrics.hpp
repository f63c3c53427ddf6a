#pragma once

#include <string>

#include "cvtomo/povm.hpp"
#include "cvtomo/types.hpp"

namespace cvtomo {

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2. Matrix square
/// roots go through eigendecompositions with negative eigenvalues clipped
/// at zero. Symmetric in its arguments up to rounding.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Diagonal of rho as a real vector.
RealVector photon_populations(const DensityMatrix& rho);

/// Scalar field sampled on a phase-space grid; values(ix, ip) belongs to
/// the grid point x_center(ix) + i p_center(ip).
struct PhaseSpaceFunction {
  enum class Kind { wigner, husimi_q };
  PhaseSpaceGrid grid;
  RealMatrix values;
  Kind kind = Kind::husimi_q;
};

/// Husimi Q(alpha) = <alpha|rho|alpha> / pi at the grid points.
PhaseSpaceFunction q_function(const DensityMatrix& rho,
                              const PhaseSpaceGrid& grid);

/// Wigner W(alpha) = (2/pi) Tr[D(alpha) P D^dag(alpha) rho] at the grid
/// points; accurate while |alpha|^2 stays well inside the cutoff.
PhaseSpaceFunction wigner_function(const DensityMatrix& rho,
                                   const PhaseSpaceGrid& grid);

/// Row-major CSV (nx lines of np comma-separated values).
void write_phase_space_csv(const std::string& path,
                           const PhaseSpaceFunction& f);

/// Simple heatmap render (binary PPM). Wigner fields use a diverging
/// colormap centered at zero; Q fields a sequential one. The CSV remains
/// the canonical artifact.
void write_heatmap_ppm(const std::string& path, const PhaseSpaceFunction& f,
                       int pixels_per_cell = 8);

}  // namespace cvtomo
