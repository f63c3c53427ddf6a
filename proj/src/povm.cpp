#include "cvtomo/povm.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <vector>

#include "cvtomo/fock.hpp"
#include "quad.hpp"

namespace cvtomo {

namespace {

// Truncation point beyond which every psi_m psi_n integrand tail for
// m, n < N is below 1e-14.
double integration_cutoff(FockDim dim) {
  return std::sqrt(2.0 * dim.n) + 6.0;
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Gauss-Hermite nodes/weights (weight e^{-x^2}) via the Jacobi matrix.
void gauss_hermite(int q, std::vector<double>& nodes,
                   std::vector<double>& weights) {
  RealMatrix jacobi = RealMatrix::Zero(q, q);
  for (int k = 1; k < q; ++k) {
    const double off = std::sqrt(k / 2.0);
    jacobi(k - 1, k) = off;
    jacobi(k, k - 1) = off;
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(jacobi);
  nodes.resize(q);
  weights.resize(q);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (int k = 0; k < q; ++k) {
    nodes[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    weights[k] = sqrt_pi * v0 * v0;
  }
}

// B_{n+k,n}(eta) = sqrt(binom(n+k,n) eta^n (1-eta)^k), evaluated in log
// space so large binomials stay finite.
double bernoulli_weight(int n, int k, double eta) {
  if (k == 0) return std::pow(eta, 0.5 * n);
  return std::exp(0.5 * (log_binomial(n + k, n) + n * std::log(eta) +
                         k * std::log1p(-eta)));
}

}  // namespace

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::homodyne: return "homodyne";
    case Scheme::heterodyne: return "heterodyne";
    case Scheme::wigner: return "wigner";
  }
  throw std::logic_error("scheme_name: bad enum");
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "homodyne") return Scheme::homodyne;
  if (name == "heterodyne") return Scheme::heterodyne;
  if (name == "wigner") return Scheme::wigner;
  throw std::invalid_argument("unknown scheme: " + name);
}

void HomodyneSettings::validate() const {
  if (angles.empty())
    throw std::invalid_argument("HomodyneSettings: need at least one angle");
  if (bin_edges.size() < 2)
    throw std::invalid_argument("HomodyneSettings: need at least two bin edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i)
    if (!(bin_edges[i - 1] < bin_edges[i]))
      throw std::invalid_argument(
          "HomodyneSettings: bin edges must be strictly increasing");
  if (!(efficiency > 0.0) || efficiency > 1.0)
    throw std::invalid_argument("HomodyneSettings: efficiency not in (0, 1]");
}

void PhaseSpaceGrid::validate() const {
  if (nx < 1 || np < 1)
    throw std::invalid_argument("PhaseSpaceGrid: grid counts must be >= 1");
  if (!(x_max > 0.0) || !(p_max > 0.0))
    throw std::invalid_argument("PhaseSpaceGrid: limits must be positive");
}

void HeterodyneSettings::validate() const {
  grid.validate();
  if (n_th < 0.0)
    throw std::invalid_argument("HeterodyneSettings: n_th must be >= 0");
}

void WignerSettings::validate() const { grid.validate(); }

void PovmSet::validate() const {
  for (const auto& op : operators) {
    if (op.rows() != dim.n || op.cols() != dim.n)
      throw std::runtime_error("PovmSet: operator dimension mismatch");
    if (hermiticity_error(op) > 1e-12)
      throw std::runtime_error("PovmSet: operator not Hermitian");
    if (scheme != Scheme::wigner && min_eigenvalue(op) < -1e-10)
      throw std::runtime_error("PovmSet: operator not positive semidefinite");
  }
}

Matrix homodyne_povm(double theta, double x_lo, double x_hi, FockDim dim) {
  if (!(x_lo < x_hi)) throw std::invalid_argument("homodyne_povm: empty bin");
  const int n = dim.n;
  const double cut = integration_cutoff(dim);
  const double a = std::max(x_lo, -cut);
  const double b = std::min(x_hi, cut);

  Matrix pi = Matrix::Zero(n, n);
  if (!(a < b)) return pi;  // bin entirely beyond the numerical support

  std::vector<double> psi(n);
  for (int m = 0; m < n; ++m) {
    for (int k = m; k < n; ++k) {
      const double overlap = detail::integrate_adaptive(
          [&](double x) {
            hosc_wavefunctions(k, x, psi);
            return psi[m] * psi[k];
          },
          a, b);
      const Complex phase = std::exp(Complex(0.0, (m - k) * theta));
      pi(m, k) = phase * overlap;
      pi(k, m) = std::conj(pi(m, k));
    }
  }
  return pi;
}

Matrix loss_degrade(const Matrix& pi, double eta, FockDim dim) {
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("loss_degrade: eta not in (0, 1]");
  if (pi.rows() != dim.n || pi.cols() != dim.n)
    throw std::invalid_argument("loss_degrade: dimension mismatch");
  if (eta == 1.0) return pi;

  const int n = dim.n;
  Matrix out = Matrix::Zero(n, n);
  std::vector<double> w(n);
  for (int k = 0; k < n; ++k) {
    const int span = n - k;
    for (int m = 0; m < span; ++m) w[m] = bernoulli_weight(m, k, eta);
    // Pi~_{m+k, n+k} += B_{m+k,m} B_{n+k,n} Pi_{m,n}; this is the adjoint
    // of the beam-splitter loss channel, so POVM completeness survives.
    for (int m = 0; m < span; ++m)
      for (int l = 0; l < span; ++l)
        out(m + k, l + k) += w[m] * w[l] * pi(m, l);
  }
  return out;
}

Matrix heterodyne_povm(Complex alpha, double cell_area, FockDim dim) {
  if (!(cell_area > 0.0))
    throw std::invalid_argument("heterodyne_povm: cell_area must be positive");
  const Vector c = coherent_state(alpha, dim);
  return (cell_area / std::numbers::pi) * (c * c.adjoint());
}

Matrix heterodyne_povm_noisy(Complex alpha, double n_th, double cell_area,
                             FockDim dim) {
  if (n_th < 0.0)
    throw std::invalid_argument("heterodyne_povm_noisy: n_th must be >= 0");
  if (n_th == 0.0) return heterodyne_povm(alpha, cell_area, dim);

  // Exact Fock block of D(alpha) rho_th D^dag(alpha) through its thermal
  // P-representation: the Gaussian weight of
  //   int exp(-|g-alpha|^2/n) |g><g| d^2g / (pi n)
  // is completed analytically and the remaining polynomial integrand is
  // handled exactly by N+2 Gauss-Hermite nodes per axis. Exponentiating the
  // truncated generator instead would reflect far displacements back into
  // the space and corrupt operators with |alpha|^2 beyond ~N/4.
  const int n = dim.n;
  const double scale = (1.0 + n_th) / n_th;             // Gaussian sharpness s
  const Complex mean = alpha / (1.0 + n_th);            // completed-square center
  const double envelope = std::exp(-std::norm(alpha) / (1.0 + n_th));

  std::vector<double> nodes, weights;
  gauss_hermite(n + 2, nodes, weights);

  std::vector<double> inv_sqrt_fact(n);
  inv_sqrt_fact[0] = 1.0;
  for (int k = 1; k < n; ++k)
    inv_sqrt_fact[k] = inv_sqrt_fact[k - 1] / std::sqrt(static_cast<double>(k));

  Matrix out = Matrix::Zero(n, n);
  Vector monomials(n);
  const double sqrt_s = std::sqrt(scale);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const Complex g = mean + Complex(nodes[i], nodes[j]) / sqrt_s;
      monomials(0) = 1.0;
      for (int k = 1; k < n; ++k) monomials(k) = monomials(k - 1) * g;
      for (int k = 0; k < n; ++k) monomials(k) *= inv_sqrt_fact[k];
      out.noalias() +=
          (weights[i] * weights[j]) * (monomials * monomials.adjoint());
    }
  }
  out *= cell_area * envelope /
         (std::numbers::pi * std::numbers::pi * n_th * scale);
  return hermitize(out);
}

Matrix wigner_povm(Complex alpha, FockDim dim) {
  const Matrix d = displacement_op(alpha, dim);
  return d * parity_op(dim) * d.adjoint();
}

double noise_efficiency_equivalence(double eta) {
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument(
        "noise_efficiency_equivalence: eta not in (0, 1]");
  return 1.0 / eta - 1.0;
}

double efficiency_from_thermal(double n_th) {
  if (n_th < 0.0)
    throw std::invalid_argument("efficiency_from_thermal: n_th must be >= 0");
  return 1.0 / (n_th + 1.0);
}

PovmSet build_povm_set(const HomodyneSettings& settings, FockDim dim) {
  settings.validate();
  PovmSet set{Scheme::homodyne, dim, {}, settings};
  const int bins = settings.n_bins();
  set.operators.reserve(settings.angles.size() * bins);
  for (double theta : settings.angles) {
    for (int j = 0; j < bins; ++j) {
      Matrix op = homodyne_povm(theta, settings.bin_edges[j],
                                settings.bin_edges[j + 1], dim);
      if (settings.efficiency < 1.0)
        op = loss_degrade(op, settings.efficiency, dim);
      set.operators.push_back(std::move(op));
    }
  }
  return set;
}

PovmSet build_povm_set(const HeterodyneSettings& settings, FockDim dim) {
  settings.validate();
  const double deficit = thermal_trace_deficit(settings.n_th, dim);
  if (deficit > 1e-3)
    std::cerr << "warning: thermal state truncation loses trace " << deficit
              << " at dim " << dim.n << "; increase the dimension\n";
  PovmSet set{Scheme::heterodyne, dim, {}, settings};
  const auto& grid = settings.grid;
  set.operators.reserve(grid.size());
  for (int k = 0; k < grid.size(); ++k)
    set.operators.push_back(heterodyne_povm_noisy(
        grid.center(k), settings.n_th, grid.cell_area(), dim));
  return set;
}

PovmSet build_povm_set(const WignerSettings& settings, FockDim dim) {
  settings.validate();
  PovmSet set{Scheme::wigner, dim, {}, settings};
  const auto& grid = settings.grid;
  set.operators.reserve(grid.size());
  for (int k = 0; k < grid.size(); ++k)
    set.operators.push_back(wigner_povm(grid.center(k), dim));
  return set;
}

}  // namespace cvtomo
