#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvtomo/povm.hpp"
#include "cvtomo/types.hpp"

namespace cvtomo {

/// Catalogue of pure test states. All are renormalized to unit norm after
/// truncation; the cat state uses the exact superposition normalization
/// 1/sqrt(2(1 + e^{-2|beta|^2})) rather than the large-beta 1/sqrt(2).
struct TestStateSpec {
  enum class Name { vac02, cat, fock04, squeezed, fock1 };
  Name name = Name::cat;
  double beta = 2.0;       // cat amplitude
  double squeeze_r = 0.5;  // squeezed-vacuum parameter
  FockDim dim{32};
};

std::string test_state_name(TestStateSpec::Name n);
TestStateSpec::Name test_state_from_name(const std::string& name);

Vector make_test_state_vector(const TestStateSpec& spec);
DensityMatrix make_test_state(const TestStateSpec& spec);

/// Noiseless heterodyne data: probability mass Q(alpha_k) * cell_area per
/// grid cell, in the grid's outcome order. Coincides with A vec(rho) for
/// the matching PovmSet by construction.
RealVector ideal_heterodyne_masses(const DensityMatrix& rho,
                                   const PhaseSpaceGrid& grid);

/// Discrete convolution of a probability-mass grid with the thermal
/// Gaussian kernel exp(-|alpha|^2 / n_th)/(pi n_th), truncated at radius
/// 6 sqrt(n_th). The kernel is renormalized per source cell over its
/// in-grid support so the total mass is preserved exactly. n_th = 0 is the
/// identity.
RealVector thermal_corrupt(const RealVector& masses,
                           const PhaseSpaceGrid& grid, double n_th);

/// One multinomial draw of num_samples over the given outcome
/// probabilities. Probability mass missing from the vector (1 - sum p) is
/// treated as an overflow outcome whose draws are discarded, so the
/// returned counts may total less than num_samples. Deterministic per seed.
std::vector<long> sample_counts(const RealVector& probabilities,
                                long num_samples, std::uint64_t seed);

/// Noiseless Wigner values W(alpha_k) over the grid, optionally with
/// additive Gaussian noise of standard deviation noise_sigma per point.
RealVector ideal_wigner_values(const DensityMatrix& rho,
                               const PhaseSpaceGrid& grid,
                               double noise_sigma = 0.0,
                               std::uint64_t seed = 0);

/// Exact binned homodyne probabilities at detection efficiency eta,
/// row (angle), column (bin). Loss acts in the data domain: the quadrature
/// density is rescaled by sqrt(eta) and convolved with a Gaussian of
/// variance (1-eta)/2 (the beam-splitter picture), then integrated over
/// each bin by adaptive quadrature.
RealMatrix homodyne_exact_probabilities(const DensityMatrix& rho,
                                        const std::vector<double>& angles,
                                        const std::vector<double>& bin_edges,
                                        double eta);

/// Sampled homodyne histograms: the loss-degraded quadrature density is
/// tabulated on a fine lattice (spacing <= 0.01), sampled by inverse CDF,
/// and binned. Each angle uses the derived seed of its index, so angles are
/// independent and the whole dataset is reproducible from one seed.
std::vector<std::vector<long>> simulate_homodyne(
    const DensityMatrix& rho, const std::vector<double>& angles,
    const std::vector<double>& bin_edges, double eta, long samples_per_angle,
    std::uint64_t seed);

/// Ideal quadrature density p(x|theta) = <x_theta|rho|x_theta>.
double homodyne_density(const DensityMatrix& rho, double theta, double x);

}  // namespace cvtomo
