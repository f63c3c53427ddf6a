#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "cvtomo/fock.hpp"
#include "cvtomo/povm.hpp"
#include "helpers.hpp"

using namespace cvtomo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Beam-splitter Kraus oracle: Pi~ = sum_k K_k^dag Pi K_k with
// K_k = sum_n B_{n+k,n} |n><n+k|.
Matrix kraus_loss_oracle(const Matrix& pi, double eta, FockDim dim) {
  const int n = dim.n;
  Matrix out = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    Matrix kraus = Matrix::Zero(n, n);
    for (int m = 0; m + k < n; ++m) {
      double log_binom = std::lgamma(m + k + 1.0) - std::lgamma(m + 1.0) -
                         std::lgamma(k + 1.0);
      double w = eta < 1.0 ? std::exp(0.5 * (log_binom + m * std::log(eta) +
                                             k * std::log1p(-eta)))
                           : (k == 0 ? 1.0 : 0.0);
      kraus(m, m + k) = w;
    }
    out += kraus.adjoint() * pi * kraus;
  }
  return out;
}

}  // namespace

TEST_CASE("homodyne povm basics") {
  const FockDim dim(6);

  // full-line bin is complete
  const Matrix full = homodyne_povm(0.7, -kInf, kInf, dim);
  CHECK((full - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);

  // half line: even ground-state density
  const Matrix half = homodyne_povm(1.1, 0.0, kInf, dim);
  CHECK(half(0, 0).real() == doctest::Approx(0.5).epsilon(1e-8));

  // int_0^inf psi_0 psi_1 = 1/sqrt(2 pi); cross-checked with the oracle
  const Matrix half0 = homodyne_povm(0.0, 0.0, kInf, dim);
  const double frozen = 0.3989422804014327;  // 1/sqrt(2 pi)
  CHECK(half0(0, 1).real() == doctest::Approx(frozen).epsilon(1e-8));
  const double oracle = test::simpson(
      [](double x) {
        return hosc_wavefunction(0, x) * hosc_wavefunction(1, x);
      },
      0.0, 12.0);
  CHECK(half0(0, 1).real() == doctest::Approx(oracle).epsilon(1e-8));

  CHECK(is_hermitian(half0, 1e-12));
  CHECK_THROWS_AS(homodyne_povm(0.0, 1.0, 1.0, dim), std::invalid_argument);
}

TEST_CASE("homodyne completeness per angle") {
  const FockDim dim(10);
  HomodyneSettings settings;
  settings.angles = {0.0, 0.9, 2.4};
  settings.bin_edges = {-kInf, -2.0, -0.7, 0.0, 1.1, 2.5, kInf};
  settings.efficiency = 1.0;
  const PovmSet set = build_povm_set(settings, dim);
  REQUIRE(set.outcomes() == 18);

  for (std::size_t a = 0; a < settings.angles.size(); ++a) {
    Matrix sum = Matrix::Zero(dim.n, dim.n);
    for (int j = 0; j < settings.n_bins(); ++j)
      sum += set.operators[a * settings.n_bins() + j];
    CHECK((sum - Matrix::Identity(dim.n, dim.n)).cwiseAbs().maxCoeff() < 1e-8);
  }
  set.validate();
}

TEST_CASE("loss degrade") {
  const FockDim dim(12);

  SUBCASE("eta = 1 is the identity map") {
    Xoshiro256 rng(3);
    const Matrix pi = test::random_hermitian(dim.n, rng);
    CHECK((loss_degrade(pi, 1.0, dim) - pi).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("k = 0 weights are eta^{n/2}") {
    // vacuum projector degrades to sum_k (1-eta)^k |k><k|
    Matrix vac = Matrix::Zero(dim.n, dim.n);
    vac(0, 0) = 1.0;
    const double eta = 0.6;
    const Matrix degraded = loss_degrade(vac, eta, dim);
    for (int k = 0; k < dim.n; ++k)
      CHECK(degraded(k, k).real() ==
            doctest::Approx(std::pow(1.0 - eta, k)).epsilon(1e-12));
    // and |n><n| keeps weight eta^n in its k = 0 term
    Matrix n3 = Matrix::Zero(dim.n, dim.n);
    n3(3, 3) = 1.0;
    CHECK(loss_degrade(n3, eta, dim)(3, 3).real() ==
          doctest::Approx(std::pow(eta, 3)).epsilon(1e-12));
  }

  SUBCASE("matches the Kraus oracle on random Hermitian operators") {
    Xoshiro256 rng(11);
    for (double eta : {0.25, 0.5, 0.8, 0.97}) {
      for (int trial = 0; trial < 4; ++trial) {
        const FockDim d(trial % 2 ? 16 : 9);
        const Matrix pi = test::random_hermitian(d.n, rng);
        const Matrix fast = loss_degrade(pi, eta, d);
        const Matrix oracle = kraus_loss_oracle(pi, eta, d);
        CHECK((fast - oracle).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }

  SUBCASE("matches the oracle on a complex homodyne operator") {
    const Matrix pi = homodyne_povm(0.8, 0.3, 1.4, dim);
    const Matrix fast = loss_degrade(pi, 0.45, dim);
    const Matrix oracle = kraus_loss_oracle(pi, 0.45, dim);
    CHECK((fast - oracle).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("completeness survives the loss transform") {
    const FockDim d(8);
    HomodyneSettings settings;
    settings.angles = {0.4};
    settings.bin_edges = {-kInf, -1.0, 0.0, 0.8, kInf};
    settings.efficiency = 0.5;
    const PovmSet set = build_povm_set(settings, d);
    Matrix sum = Matrix::Zero(d.n, d.n);
    for (const auto& op : set.operators) sum += op;
    CHECK((sum - Matrix::Identity(d.n, d.n)).cwiseAbs().maxCoeff() < 1e-8);
  }

  CHECK_THROWS_AS(loss_degrade(Matrix::Identity(12, 12), 0.0, dim),
                  std::invalid_argument);
  CHECK_THROWS_AS(loss_degrade(Matrix::Identity(12, 12), 1.2, dim),
                  std::invalid_argument);
}

TEST_CASE("heterodyne povm") {
  const FockDim dim(32);

  const Matrix vac = heterodyne_povm(0.0, std::numbers::pi, dim);
  CHECK(std::abs(vac(0, 0) - 1.0) < 1e-14);
  CHECK(vac.cwiseAbs().sum() == doctest::Approx(1.0));

  // rank one, trace = cell/pi * ||alpha>|^2
  const Complex alpha(1.2, 0.4);
  const double cell = 0.3;
  const Matrix pi_op = heterodyne_povm(alpha, cell, dim);
  Eigen::SelfAdjointEigenSolver<Matrix> es(pi_op);
  int positive = 0;
  for (int i = 0; i < dim.n; ++i)
    if (es.eigenvalues()(i) > 1e-12) ++positive;
  CHECK(positive == 1);
  CHECK(pi_op.trace().real() ==
        doctest::Approx(cell / std::numbers::pi *
                        coherent_state(alpha, dim).squaredNorm()));

  // vacuum mass over a wide grid sums to one
  PhaseSpaceGrid grid{6.0, 6.0, 25, 25};
  double mass = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    const Matrix op = heterodyne_povm(grid.center(k), grid.cell_area(), dim);
    mass += op(0, 0).real();  // Tr[Pi |0><0|]
  }
  CHECK(std::abs(mass - 1.0) < 1e-3);
}

TEST_CASE("noisy heterodyne povm") {
  const FockDim dim(48);
  const double cell = 0.15;

  const Complex alpha(0.9, -1.1);
  const Matrix clean = heterodyne_povm_noisy(alpha, 0.0, cell, dim);
  CHECK((clean - heterodyne_povm(alpha, cell, dim)).cwiseAbs().maxCoeff() <
        1e-10);

  const Matrix centred = heterodyne_povm_noisy(0.0, 1.3, cell, dim);
  const Matrix expected =
      cell / std::numbers::pi * thermal_state(1.3, dim).matrix();
  CHECK((centred - expected).cwiseAbs().maxCoeff() < 1e-12);

  // displacement preserves the (truncated) thermal trace
  const Matrix displaced = heterodyne_povm_noisy(alpha, 1.3, cell, dim);
  CHECK(displaced.trace().real() ==
        doctest::Approx(cell / std::numbers::pi *
                        thermal_state(1.3, dim).matrix().trace().real())
            .epsilon(1e-8));

  CHECK_THROWS_AS(heterodyne_povm_noisy(0.0, -1.0, cell, dim),
                  std::invalid_argument);
}

TEST_CASE("wigner povm") {
  const FockDim dim(16);
  const Matrix at_origin = wigner_povm(0.0, dim);
  CHECK((at_origin - parity_op(dim)).cwiseAbs().maxCoeff() < 1e-12);

  CHECK(2.0 / std::numbers::pi * at_origin(0, 0).real() ==
        doctest::Approx(2.0 / std::numbers::pi));
  CHECK(2.0 / std::numbers::pi * at_origin(1, 1).real() ==
        doctest::Approx(-2.0 / std::numbers::pi));
}

TEST_CASE("noise/efficiency equivalence") {
  CHECK(noise_efficiency_equivalence(1.0) == doctest::Approx(0.0));
  CHECK(noise_efficiency_equivalence(0.5) == doctest::Approx(1.0));
  CHECK(noise_efficiency_equivalence(0.2) == doctest::Approx(4.0));
  CHECK_THROWS_AS(noise_efficiency_equivalence(0.0), std::invalid_argument);
  CHECK_THROWS_AS(noise_efficiency_equivalence(1.5), std::invalid_argument);

  for (double eta = 0.05; eta <= 1.0; eta += 0.05) {
    CHECK(std::abs(efficiency_from_thermal(noise_efficiency_equivalence(eta)) -
                   eta) < 1e-15);
  }
}

TEST_CASE("povm set batching") {
  const FockDim dim(8);

  HomodyneSettings hs;
  for (int a = 0; a < 20; ++a)
    hs.angles.push_back(a * std::numbers::pi / 20.0);
  hs.bin_edges.push_back(-kInf);
  for (int j = 0; j <= 18; ++j) hs.bin_edges.push_back(-4.0 + j * 8.0 / 18.0);
  hs.bin_edges.push_back(kInf);
  REQUIRE(hs.n_bins() == 20);
  const PovmSet homodyne_set = build_povm_set(hs, dim);
  CHECK(homodyne_set.outcomes() == 400);

  HeterodyneSettings het{PhaseSpaceGrid{6.0, 6.0, 25, 25}, 0.0};
  const PovmSet het_set = build_povm_set(het, FockDim(12));
  CHECK(het_set.outcomes() == 625);
  het_set.validate();

  WignerSettings wig{PhaseSpaceGrid{2.0, 2.0, 7, 7}};
  const PovmSet wig_set = build_povm_set(wig, FockDim(10));
  CHECK(wig_set.outcomes() == 49);
  wig_set.validate();
}

TEST_CASE("heterodyne grid near-completeness diagnostic") {
  // coarse check: grid covering beyond |alpha| <= sqrt(N) at spacing 0.5
  const FockDim dim(16);
  PhaseSpaceGrid grid{5.0, 5.0, 20, 20};
  Matrix sum = Matrix::Zero(dim.n, dim.n);
  for (int k = 0; k < grid.size(); ++k)
    sum += heterodyne_povm(grid.center(k), grid.cell_area(), dim);
  const int block = dim.n - (dim.n + 3) / 4;  // 12
  const Matrix defect = sum.topLeftCorner(block, block) -
                        Matrix::Identity(block, block);
  CHECK(defect.cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("grid outcome ordering") {
  PhaseSpaceGrid grid{2.0, 1.0, 4, 2};
  grid.validate();
  CHECK(grid.size() == 8);
  CHECK(grid.cell_area() == doctest::Approx(1.0));
  // k = ix*np + ip
  CHECK(grid.center(0) == Complex(-1.5, -0.5));
  CHECK(grid.center(1) == Complex(-1.5, 0.5));
  CHECK(grid.center(2) == Complex(-0.5, -0.5));
  CHECK(grid.center(7) == Complex(1.5, 0.5));
}
