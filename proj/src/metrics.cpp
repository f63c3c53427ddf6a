#include "cvtomo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "cvtomo/fock.hpp"

namespace cvtomo {

namespace {

// Eigenvalues below the clip floor count as zero. The floor sits at the
// eigensolver's noise level ~ N eps ||m||: square roots amplify that noise
// to sqrt(eps), which would otherwise swamp tight fidelity comparisons.
double clip(double lambda, double floor) {
  return lambda > floor ? lambda : 0.0;
}

double clip_floor(const Eigen::SelfAdjointEigenSolver<Matrix>& es) {
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  return 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

// U sqrt(max(lambda, 0)) U^dag
Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(m));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("psd_sqrt: eigendecomposition failed");
  const double floor = clip_floor(es);
  Vector lam(es.eigenvalues().size());
  for (int i = 0; i < lam.size(); ++i)
    lam(i) = std::sqrt(clip(es.eigenvalues()(i), floor));
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim())
    throw std::invalid_argument("fidelity: dimension mismatch");
  const Matrix sqrt_rho = psd_sqrt(rho.matrix());
  const Matrix inner = sqrt_rho * sigma.matrix() * sqrt_rho;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(inner),
                                           Eigen::EigenvaluesOnly);
  const double floor = clip_floor(es);
  double trace_sqrt = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    trace_sqrt += std::sqrt(clip(es.eigenvalues()(i), floor));
  return trace_sqrt * trace_sqrt;
}

RealVector photon_populations(const DensityMatrix& rho) {
  return rho.matrix().diagonal().real();
}

PhaseSpaceFunction q_function(const DensityMatrix& rho,
                              const PhaseSpaceGrid& grid) {
  grid.validate();
  const FockDim dim{rho.dim()};
  PhaseSpaceFunction f{grid, RealMatrix(grid.nx, grid.np),
                       PhaseSpaceFunction::Kind::husimi_q};
  for (int ix = 0; ix < grid.nx; ++ix) {
    for (int ip = 0; ip < grid.np; ++ip) {
      const Vector c =
          coherent_state({grid.x_center(ix), grid.p_center(ip)}, dim);
      f.values(ix, ip) =
          (c.adjoint() * rho.matrix() * c)(0).real() / std::numbers::pi;
    }
  }
  return f;
}

PhaseSpaceFunction wigner_function(const DensityMatrix& rho,
                                   const PhaseSpaceGrid& grid) {
  grid.validate();
  const FockDim dim{rho.dim()};
  const Matrix parity = parity_op(dim);
  PhaseSpaceFunction f{grid, RealMatrix(grid.nx, grid.np),
                       PhaseSpaceFunction::Kind::wigner};
  for (int ix = 0; ix < grid.nx; ++ix) {
    for (int ip = 0; ip < grid.np; ++ip) {
      const Matrix d =
          displacement_op({grid.x_center(ix), grid.p_center(ip)}, dim);
      // (2/pi) Tr[D P D^dag rho] without forming the full product trace
      const Matrix displaced = d * parity * d.adjoint();
      f.values(ix, ip) = (2.0 / std::numbers::pi) *
                         displaced.cwiseProduct(rho.matrix().transpose())
                             .sum()
                             .real();
    }
  }
  return f;
}

void write_phase_space_csv(const std::string& path,
                           const PhaseSpaceFunction& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  for (int ix = 0; ix < f.grid.nx; ++ix) {
    for (int ip = 0; ip < f.grid.np; ++ip) {
      if (ip) out << ',';
      out << f.values(ix, ip);
    }
    out << '\n';
  }
}

namespace {

struct Rgb {
  unsigned char r, g, b;
};

Rgb sequential_color(double t) {  // dark blue -> teal -> yellow
  t = std::clamp(t, 0.0, 1.0);
  const double r = std::clamp(1.66 * t - 0.45, 0.0, 1.0);
  const double g = std::clamp(1.2 * t + 0.02, 0.0, 1.0);
  const double b = std::clamp(0.9 - 0.75 * t * t, 0.1, 1.0) * (0.4 + 0.6 * t);
  return {static_cast<unsigned char>(255 * r),
          static_cast<unsigned char>(255 * g),
          static_cast<unsigned char>(255 * b)};
}

Rgb diverging_color(double t) {  // blue -> white -> red, t in [-1, 1]
  t = std::clamp(t, -1.0, 1.0);
  if (t < 0) {
    const double s = 1.0 + t;
    return {static_cast<unsigned char>(255 * s),
            static_cast<unsigned char>(255 * s), 255};
  }
  const double s = 1.0 - t;
  return {255, static_cast<unsigned char>(255 * s),
          static_cast<unsigned char>(255 * s)};
}

}  // namespace

void write_heatmap_ppm(const std::string& path, const PhaseSpaceFunction& f,
                       int pixels_per_cell) {
  if (pixels_per_cell < 1) pixels_per_cell = 1;
  const int w = f.grid.np * pixels_per_cell;
  const int h = f.grid.nx * pixels_per_cell;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "P6\n" << w << ' ' << h << "\n255\n";

  const bool diverging = f.kind == PhaseSpaceFunction::Kind::wigner;
  const double vmax = std::max(f.values.cwiseAbs().maxCoeff(), 1e-300);
  const double vmin = f.values.minCoeff();

  // image rows run from large x down to -x_max so the origin sits bottom-left
  for (int row = 0; row < h; ++row) {
    const int ix = f.grid.nx - 1 - row / pixels_per_cell;
    for (int col = 0; col < w; ++col) {
      const int ip = col / pixels_per_cell;
      const double v = f.values(ix, ip);
      const Rgb c = diverging
                        ? diverging_color(v / vmax)
                        : sequential_color((v - vmin) / (vmax - vmin + 1e-300));
      out.put(static_cast<char>(c.r));
      out.put(static_cast<char>(c.g));
      out.put(static_cast<char>(c.b));
    }
  }
}

}  // namespace cvtomo
