#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <numbers>

#include "cvtomo/assemble.hpp"
#include "cvtomo/fock.hpp"
#include "helpers.hpp"

using namespace cvtomo;

TEST_CASE("vectorize stacks columns") {
  Matrix rho(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rho(i, j) = Complex(i, 10 * j);
  const Vector v = vectorize(rho);
  // (rho00, rho10, rho20, rho01, rho11, rho21, rho02, rho12, rho22)
  const int expect_i[] = {0, 1, 2, 0, 1, 2, 0, 1, 2};
  const int expect_j[] = {0, 0, 0, 1, 1, 1, 2, 2, 2};
  for (int c = 0; c < 9; ++c)
    CHECK(v(c) == Complex(expect_i[c], 10 * expect_j[c]));

  const Vector id = vectorize(Matrix::Identity(2, 2));
  CHECK(id(0) == Complex(1.0));
  CHECK(id(1) == Complex(0.0));
  CHECK(id(2) == Complex(0.0));
  CHECK(id(3) == Complex(1.0));

  CHECK_THROWS_AS(vectorize(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("vectorize round trip") {
  Xoshiro256 rng(5);
  const Matrix rho = test::random_ginibre(8, rng);
  CHECK((unvectorize(vectorize(rho)) - rho).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(unvectorize(Vector::Zero(10)), std::invalid_argument);
}

TEST_CASE("basis operators") {
  const FockDim dim(4);
  const auto ops = basis_ops(dim);
  REQUIRE(ops.size() == 16);

  for (int c = 0; c < 16; ++c) {
    const int i = c % 4, j = c / 4;
    CHECK(ops[c](i, j) == Complex(1.0));
    CHECK(ops[c].cwiseAbs().sum() == doctest::Approx(1.0));
    CHECK(basis_column(i, j, 4) == c);
  }

  // row-major label of |i><j| is i*N + j; |0><1| carries label 1 at dim 2
  CHECK(0 * 2 + 1 == 1);

  Matrix diag_sum = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) diag_sum += ops[basis_column(i, i, 4)];
  CHECK((diag_sum - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);

  // expansion rho = sum_c vec(rho)[c] Omega_c
  Xoshiro256 rng(2);
  const Matrix rho = test::random_density(4, rng);
  const Vector v = vectorize(rho);
  Matrix rebuilt = Matrix::Zero(4, 4);
  for (int c = 0; c < 16; ++c) rebuilt += v(c) * ops[c];
  CHECK((rebuilt - rho).cwiseAbs().maxCoeff() < 1e-15);
}

namespace {

PovmSet single_operator_set(const Matrix& pi, FockDim dim) {
  PhaseSpaceGrid grid{1.0, 1.0, 1, 1};
  return PovmSet{Scheme::heterodyne, dim, {pi}, HeterodyneSettings{grid, 0.0}};
}

}  // namespace

TEST_CASE("design matrix rows") {
  const FockDim dim(3);

  SUBCASE("identity operator row hits only diagonal basis columns") {
    const DesignMatrix a =
        build_design_matrix(single_operator_set(Matrix::Identity(3, 3), dim));
    REQUIRE(a.entries.rows() == 1);
    REQUIRE(a.entries.cols() == 9);
    for (int c = 0; c < 9; ++c) {
      const double expect = (c % 3 == c / 3) ? 1.0 : 0.0;
      CHECK(std::abs(a.entries(0, c) - expect) < 1e-15);
    }
  }

  SUBCASE("row dot vectorize equals the direct trace") {
    Xoshiro256 rng(9);
    const FockDim d(6);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix rho = test::random_density(d.n, rng);
      Matrix g = test::random_ginibre(d.n, rng);
      const Matrix pi = g * g.adjoint();  // random PSD
      const DesignMatrix a = build_design_matrix(single_operator_set(pi, d));
      const Complex predicted = (a.entries * vectorize(rho))(0);
      const Complex direct = (pi * rho).trace();
      CHECK(std::abs(predicted - direct) < 1e-12);
      CHECK(std::abs(predicted.imag()) < 1e-12);  // Hermitian pair => real
    }
  }

  SUBCASE("golden 3x3 layout") {
    Matrix pi(3, 3);
    pi << Complex(1.0, 0.0), Complex(0.5, 0.25), Complex(0.0, -0.75),
        Complex(0.5, -0.25), Complex(2.0, 0.0), Complex(-1.0, 0.5),
        Complex(0.0, 0.75), Complex(-1.0, -0.5), Complex(3.0, 0.0);
    REQUIRE(is_hermitian(pi));
    const DesignMatrix a = build_design_matrix(single_operator_set(pi, dim));
    // A(0, c) = <j|Pi|i> = pi(c/3, c%3)
    const Complex golden[9] = {
        {1.0, 0.0},  {0.5, 0.25},  {0.0, -0.75},
        {0.5, -0.25}, {2.0, 0.0},  {-1.0, 0.5},
        {0.0, 0.75}, {-1.0, -0.5}, {3.0, 0.0}};
    for (int c = 0; c < 9; ++c) CHECK(a.entries(0, c) == golden[c]);
  }
}

TEST_CASE("design matrix over real povm sets") {
  constexpr double inf = std::numeric_limits<double>::infinity();

  SUBCASE("homodyne consistency identity") {
    const FockDim dim(6);
    HomodyneSettings hs;
    hs.angles = {0.0, 0.7, 1.9};
    hs.bin_edges = {-inf, -1.0, 0.0, 1.0, inf};
    const PovmSet set = build_povm_set(hs, dim);
    const DesignMatrix a = build_design_matrix(set);
    CHECK(a.entries.rows() == 12);

    Xoshiro256 rng(4);
    const Matrix rho = test::random_density(dim.n, rng);
    const Vector predicted = a.entries * vectorize(rho);
    for (int k = 0; k < set.outcomes(); ++k) {
      const Complex direct = (set.operators[k] * rho).trace();
      CHECK(std::abs(predicted(k) - direct) < 1e-12);
      CHECK(std::abs(predicted(k).imag()) < 1e-12);
    }
  }

  SUBCASE("heterodyne shape matches the grid") {
    HeterodyneSettings het{PhaseSpaceGrid{6.0, 6.0, 25, 25}, 0.0};
    const DesignMatrix a =
        build_design_matrix(build_povm_set(het, FockDim(32)));
    CHECK(a.entries.rows() == 625);
    CHECK(a.entries.cols() == 1024);
  }

  SUBCASE("wigner rows carry the 2/pi prefactor") {
    const FockDim dim(8);
    WignerSettings wig{PhaseSpaceGrid{1.5, 1.5, 3, 3}};
    const PovmSet set = build_povm_set(wig, dim);
    const DesignMatrix a = build_design_matrix(set);
    Xoshiro256 rng(6);
    const Matrix rho = test::random_density(dim.n, rng);
    const Vector predicted = a.entries * vectorize(rho);
    for (int k = 0; k < set.outcomes(); ++k) {
      const Complex direct =
          2.0 / std::numbers::pi * (set.operators[k] * rho).trace();
      CHECK(std::abs(predicted(k) - direct) < 1e-12);
    }
  }
}

TEST_CASE("measurement vectors") {
  HeterodyneSettings het{PhaseSpaceGrid{2.0, 2.0, 2, 2}, 0.0};
  const PovmSet set = build_povm_set(het, FockDim(4));

  SUBCASE("counts are normalized by total samples") {
    const std::vector<long> counts = {6, 2, 2, 0};
    const MeasurementVector b = build_measurement_vector(counts, set);
    CHECK(b.values.sum() == doctest::Approx(1.0));
    CHECK(b.values(0) == doctest::Approx(0.6));
    CHECK(b.sample_count == 10);

    // overflow samples excluded from the histogram but kept in the total
    const MeasurementVector b2 = build_measurement_vector(counts, set, 20);
    CHECK(b2.values.sum() == doctest::Approx(0.5));
  }

  SUBCASE("error paths") {
    CHECK_THROWS_AS(build_measurement_vector({0, 0, 0, 0}, set),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_measurement_vector({1, -2, 3, 1}, set),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_measurement_vector({1, 2, 3}, set),
                    std::invalid_argument);
    RealVector over(4);
    over << 0.5, 0.5, 0.5, 0.5;
    CHECK_THROWS_AS(
        build_measurement_vector(over, Normalization::probabilities, set),
        std::invalid_argument);
  }

  SUBCASE("wigner values pass through unscaled") {
    WignerSettings wig{PhaseSpaceGrid{1.0, 1.0, 2, 2}};
    const PovmSet wset = build_povm_set(wig, FockDim(4));
    RealVector w(4);
    w << 0.6, -0.3, 0.2, -0.1;  // negative values are fine here
    const MeasurementVector b =
        build_measurement_vector(w, Normalization::wigner_values, wset);
    CHECK((b.values - w).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("homodyne per-angle histograms normalize per angle") {
    constexpr double inf = std::numeric_limits<double>::infinity();
    HomodyneSettings hs;
    hs.angles = {0.0, 1.0};
    hs.bin_edges = {-inf, 0.0, inf};
    const PovmSet hset = build_povm_set(hs, FockDim(3));
    const std::vector<std::vector<long>> hists = {{3, 1}, {5, 15}};
    const MeasurementVector b = build_measurement_vector(hists, hset);
    CHECK(b.values(0) == doctest::Approx(0.75));
    CHECK(b.values(1) == doctest::Approx(0.25));
    CHECK(b.values(2) == doctest::Approx(0.25));
    CHECK(b.values(3) == doctest::Approx(0.75));
    CHECK(b.sample_count == 24);

    const std::vector<std::vector<long>> short_hists = {{3, 1}};
    CHECK_THROWS_AS(build_measurement_vector(short_hists, hset),
                    std::invalid_argument);
    const std::vector<std::vector<long>> empty_angle = {{3, 1}, {0, 0}};
    CHECK_THROWS_AS(build_measurement_vector(empty_angle, hset),
                    std::invalid_argument);
  }
}
