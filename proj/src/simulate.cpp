#include "cvtomo/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cvtomo/fock.hpp"
#include "cvtomo/metrics.hpp"
#include "cvtomo/rng.hpp"
#include "quad.hpp"

namespace cvtomo {

std::string test_state_name(TestStateSpec::Name n) {
  switch (n) {
    case TestStateSpec::Name::vac02: return "vac02";
    case TestStateSpec::Name::cat: return "cat";
    case TestStateSpec::Name::fock04: return "fock04";
    case TestStateSpec::Name::squeezed: return "squeezed";
    case TestStateSpec::Name::fock1: return "fock1";
  }
  throw std::logic_error("test_state_name: bad enum");
}

TestStateSpec::Name test_state_from_name(const std::string& name) {
  if (name == "vac02") return TestStateSpec::Name::vac02;
  if (name == "cat") return TestStateSpec::Name::cat;
  if (name == "fock04") return TestStateSpec::Name::fock04;
  if (name == "squeezed") return TestStateSpec::Name::squeezed;
  if (name == "fock1") return TestStateSpec::Name::fock1;
  throw std::invalid_argument("unknown test state: " + name);
}

Vector make_test_state_vector(const TestStateSpec& spec) {
  const int n = spec.dim.n;
  Vector psi = Vector::Zero(n);
  switch (spec.name) {
    case TestStateSpec::Name::vac02: {
      psi(0) = 1.0 / std::sqrt(2.0);
      if (n > 2) psi(2) = 1.0 / std::sqrt(2.0);
      break;
    }
    case TestStateSpec::Name::cat: {
      const double b2 = spec.beta * spec.beta;
      const double norm = 1.0 / std::sqrt(2.0 * (1.0 + std::exp(-2.0 * b2)));
      psi = norm * (coherent_state(spec.beta, spec.dim) +
                    coherent_state(-spec.beta, spec.dim));
      break;
    }
    case TestStateSpec::Name::fock04: {
      psi(0) = 1.0 / std::sqrt(2.0);
      if (n > 4) psi(4) = 1.0 / std::sqrt(2.0);
      break;
    }
    case TestStateSpec::Name::squeezed: {
      // even amplitudes with ratio t_m/t_{m-1} = -tanh(r) sqrt((2m-1)/(2m))
      const double th = std::tanh(spec.squeeze_r);
      double amp = 1.0 / std::sqrt(std::cosh(spec.squeeze_r));
      for (int m = 0; 2 * m < n; ++m) {
        psi(2 * m) = amp;
        amp *= -th * std::sqrt((2.0 * m + 1.0) / (2.0 * m + 2.0));
      }
      break;
    }
    case TestStateSpec::Name::fock1: {
      if (n < 2)
        throw std::invalid_argument("fock1 needs dimension >= 2");
      psi(1) = 1.0;
      break;
    }
  }
  psi /= psi.norm();
  return psi;
}

DensityMatrix make_test_state(const TestStateSpec& spec) {
  const Vector psi = make_test_state_vector(spec);
  return DensityMatrix(psi * psi.adjoint());
}

RealVector ideal_heterodyne_masses(const DensityMatrix& rho,
                                   const PhaseSpaceGrid& grid) {
  grid.validate();
  const FockDim dim{rho.dim()};
  const double scale = grid.cell_area() / std::numbers::pi;
  RealVector masses(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    const Vector c = coherent_state(grid.center(k), dim);
    masses(k) = scale * (c.adjoint() * rho.matrix() * c)(0).real();
  }
  return masses;
}

RealVector thermal_corrupt(const RealVector& masses,
                           const PhaseSpaceGrid& grid, double n_th) {
  if (n_th < 0.0)
    throw std::invalid_argument("thermal_corrupt: n_th must be >= 0");
  if (masses.size() != grid.size())
    throw std::invalid_argument("thermal_corrupt: grid size mismatch");
  if (n_th == 0.0) return masses;

  const double radius = 6.0 * std::sqrt(n_th);
  const int kx = static_cast<int>(std::ceil(radius / grid.dx()));
  const int kp = static_cast<int>(std::ceil(radius / grid.dp()));

  // thermal P-function kernel exp(-|alpha|^2/n)/(pi n) sampled per cell
  RealMatrix kernel(2 * kx + 1, 2 * kp + 1);
  for (int dxi = -kx; dxi <= kx; ++dxi) {
    for (int dpi = -kp; dpi <= kp; ++dpi) {
      const double r2 = dxi * grid.dx() * dxi * grid.dx() +
                        dpi * grid.dp() * dpi * grid.dp();
      kernel(dxi + kx, dpi + kp) =
          r2 <= radius * radius ? std::exp(-r2 / n_th) : 0.0;
    }
  }
  kernel /= kernel.sum();

  // scatter each source cell's mass over its in-grid kernel support,
  // renormalized there, so the total mass is conserved exactly
  RealVector out = RealVector::Zero(grid.size());
  for (int ix = 0; ix < grid.nx; ++ix) {
    for (int ip = 0; ip < grid.np; ++ip) {
      const double mass = masses(ix * grid.np + ip);
      if (mass == 0.0) continue;
      const int x0 = std::max(0, ix - kx), x1 = std::min(grid.nx - 1, ix + kx);
      const int p0 = std::max(0, ip - kp), p1 = std::min(grid.np - 1, ip + kp);
      double support = 0.0;
      for (int tx = x0; tx <= x1; ++tx)
        for (int tp = p0; tp <= p1; ++tp)
          support += kernel(tx - ix + kx, tp - ip + kp);
      const double scale = mass / support;
      for (int tx = x0; tx <= x1; ++tx)
        for (int tp = p0; tp <= p1; ++tp)
          out(tx * grid.np + tp) += scale * kernel(tx - ix + kx, tp - ip + kp);
    }
  }
  return out;
}

std::vector<long> sample_counts(const RealVector& probabilities,
                                long num_samples, std::uint64_t seed) {
  if (num_samples < 1)
    throw std::invalid_argument("sample_counts: num_samples must be >= 1");
  const int cells = static_cast<int>(probabilities.size());
  std::vector<double> cdf(cells);
  double running = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double p = probabilities(i);
    if (p < 0.0)
      throw std::invalid_argument("sample_counts: negative probability");
    running += p;
    cdf[i] = running;
  }
  // mass beyond sum(p) up to 1 is an overflow outcome, dropped from counts
  const double total = std::max(running, 1.0);

  std::vector<long> counts(cells, 0);
  Xoshiro256 rng(seed);
  for (long s = 0; s < num_samples; ++s) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it != cdf.end()) ++counts[it - cdf.begin()];
  }
  return counts;
}

RealVector ideal_wigner_values(const DensityMatrix& rho,
                               const PhaseSpaceGrid& grid, double noise_sigma,
                               std::uint64_t seed) {
  const PhaseSpaceFunction w = wigner_function(rho, grid);
  RealVector values(grid.size());
  for (int ix = 0; ix < grid.nx; ++ix)
    for (int ip = 0; ip < grid.np; ++ip)
      values(ix * grid.np + ip) = w.values(ix, ip);
  if (noise_sigma > 0.0) {
    Xoshiro256 rng(seed);
    for (int k = 0; k < values.size(); ++k)
      values(k) += noise_sigma * rng.normal();
  }
  return values;
}

namespace {

double lattice_cutoff(int dim) { return std::sqrt(2.0 * dim) + 6.0; }

// Re(rho_mn e^{i(n-m)theta}) as a dense real matrix; the quadrature density
// is then p(x) = psi^T M psi with real psi.
RealMatrix rotated_real_part(const Matrix& rho, double theta) {
  const int n = static_cast<int>(rho.rows());
  RealMatrix m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      m(a, b) = (rho(a, b) * std::exp(Complex(0.0, (b - a) * theta))).real();
  return m;
}

double density_at(const RealMatrix& rotated, std::vector<double>& psi,
                  double x) {
  const int n = static_cast<int>(rotated.rows());
  hosc_wavefunctions(n - 1, x, psi);
  const Eigen::Map<const RealVector> pv(psi.data(), n);
  return pv.dot(rotated * pv);
}

}  // namespace

double homodyne_density(const DensityMatrix& rho, double theta, double x) {
  std::vector<double> psi(rho.dim());
  const RealMatrix rotated = rotated_real_part(rho.matrix(), theta);
  return density_at(rotated, psi, x);
}

RealMatrix homodyne_exact_probabilities(const DensityMatrix& rho,
                                        const std::vector<double>& angles,
                                        const std::vector<double>& bin_edges,
                                        double eta) {
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument(
        "homodyne_exact_probabilities: eta not in (0, 1]");
  if (bin_edges.size() < 2)
    throw std::invalid_argument(
        "homodyne_exact_probabilities: need at least two bin edges");
  const int n = rho.dim();
  const int bins = static_cast<int>(bin_edges.size()) - 1;
  const double cut = lattice_cutoff(n);
  const double sigma = std::sqrt(0.5 * (1.0 - eta));
  const double sqrt_eta = std::sqrt(eta);

  // Bin weights J_mn = int psi_m psi_n w_bin(x) dx are angle independent;
  // the angle only rotates the Fock phases of rho.
  std::vector<RealMatrix> weights(bins, RealMatrix::Zero(n, n));
  std::vector<double> psi(n);
  for (int j = 0; j < bins; ++j) {
    const double lo = bin_edges[j];
    const double hi = bin_edges[j + 1];
    auto& jm = weights[j];
    if (eta == 1.0) {
      const double a = std::max(lo, -cut);
      const double b = std::min(hi, cut);
      if (!(a < b)) continue;
      for (int m = 0; m < n; ++m)
        for (int k = m; k < n; ++k) {
          jm(m, k) = detail::integrate_adaptive(
              [&](double x) {
                hosc_wavefunctions(k, x, psi);
                return psi[m] * psi[k];
              },
              a, b);
          jm(k, m) = jm(m, k);
        }
    } else {
      // loss acts in the data domain: the measured value is
      // sqrt(eta) x + vacuum noise of variance (1-eta)/2, so the bin
      // indicator becomes a Gaussian box profile in x
      const auto box = [&](double x) {
        const double zh = (hi - sqrt_eta * x) / (sigma * std::sqrt(2.0));
        const double zl = (lo - sqrt_eta * x) / (sigma * std::sqrt(2.0));
        return 0.5 * (std::erf(zh) - std::erf(zl));
      };
      for (int m = 0; m < n; ++m)
        for (int k = m; k < n; ++k) {
          jm(m, k) = detail::integrate_adaptive(
              [&](double x) {
                hosc_wavefunctions(k, x, psi);
                return psi[m] * psi[k] * box(x);
              },
              -cut, cut);
          jm(k, m) = jm(m, k);
        }
    }
  }

  RealMatrix probs(angles.size(), bins);
  for (std::size_t a = 0; a < angles.size(); ++a) {
    const RealMatrix rotated = rotated_real_part(rho.matrix(), angles[a]);
    for (int j = 0; j < bins; ++j)
      probs(static_cast<int>(a), j) = rotated.cwiseProduct(weights[j]).sum();
  }
  return probs;
}

std::vector<std::vector<long>> simulate_homodyne(
    const DensityMatrix& rho, const std::vector<double>& angles,
    const std::vector<double>& bin_edges, double eta, long samples_per_angle,
    std::uint64_t seed) {
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("simulate_homodyne: eta not in (0, 1]");
  if (samples_per_angle < 1)
    throw std::invalid_argument("simulate_homodyne: need at least one sample");
  const int n = rho.dim();
  const double cut = lattice_cutoff(n);
  const int half = static_cast<int>(std::ceil(cut / 0.01));
  const int points = 2 * half + 1;
  const double h = cut / half;  // <= 0.01
  const double sqrt_eta = std::sqrt(eta);

  // Gaussian kernel for the added vacuum noise, variance (1-eta)/2
  std::vector<double> kernel;
  if (eta < 1.0) {
    const double sigma = std::sqrt(0.5 * (1.0 - eta));
    const int kh = static_cast<int>(std::ceil(6.0 * sigma / h));
    kernel.resize(2 * kh + 1);
    double sum = 0.0;
    for (int d = -kh; d <= kh; ++d) {
      kernel[d + kh] = std::exp(-0.5 * (d * h) * (d * h) / (sigma * sigma));
      sum += kernel[d + kh];
    }
    for (double& k : kernel) k /= sum;
  }

  std::vector<std::vector<long>> histograms;
  histograms.reserve(angles.size());
  std::vector<double> psi(n);
  std::vector<double> density(points), convolved(points), cdf(points);

  for (std::size_t a = 0; a < angles.size(); ++a) {
    const RealMatrix rotated = rotated_real_part(rho.matrix(), angles[a]);

    // density of sqrt(eta) x on the lattice
    for (int i = 0; i < points; ++i) {
      const double y = -cut + i * h;
      const double p = density_at(rotated, psi, y / sqrt_eta) / sqrt_eta;
      if (!std::isfinite(p))
        throw std::runtime_error("simulate_homodyne: non-finite density");
      density[i] = p;
    }

    if (eta < 1.0) {
      const int kh = (static_cast<int>(kernel.size()) - 1) / 2;
      for (int i = 0; i < points; ++i) {
        double acc = 0.0;
        const int d0 = std::max(-kh, i - (points - 1));
        const int d1 = std::min(kh, i);
        for (int d = d0; d <= d1; ++d) acc += density[i - d] * kernel[d + kh];
        convolved[i] = acc;
      }
    } else {
      convolved = density;
    }

    cdf[0] = 0.0;
    for (int i = 1; i < points; ++i)
      cdf[i] = cdf[i - 1] + 0.5 * (convolved[i - 1] + convolved[i]) * h;
    const double total = cdf[points - 1];
    if (!(total > 0.0))
      throw std::runtime_error("simulate_homodyne: degenerate distribution");

    Xoshiro256 rng(derived_seed(seed, a));
    std::vector<long> hist(bin_edges.size() - 1, 0);
    for (long s = 0; s < samples_per_angle; ++s) {
      const double u = rng.uniform() * total;
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const int i1 = std::min<int>(points - 1,
                                   static_cast<int>(it - cdf.begin()));
      const int i0 = i1 - 1;
      const double span = cdf[i1] - cdf[i0];
      const double frac = span > 0.0 ? (u - cdf[i0]) / span : 0.5;
      const double x = -cut + (i0 + frac) * h;
      const auto bin =
          std::upper_bound(bin_edges.begin(), bin_edges.end(), x);
      if (bin != bin_edges.begin() && bin != bin_edges.end())
        ++hist[bin - bin_edges.begin() - 1];
    }
    histograms.push_back(std::move(hist));
  }
  return histograms;
}

}  // namespace cvtomo
