#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "cvtomo/assemble.hpp"
#include "cvtomo/simulate.hpp"
#include "cvtomo/solver.hpp"
#include "helpers.hpp"

using namespace cvtomo;

namespace {

// small informative heterodyne problem with exact data
struct Problem {
  DesignMatrix a;
  MeasurementVector b;
  DensityMatrix truth;
};

Problem make_problem(int dim, int grid_n = 10, double span = 4.0) {
  TestStateSpec spec;
  spec.name = TestStateSpec::Name::vac02;
  spec.dim = FockDim(dim);
  DensityMatrix rho = make_test_state(spec);
  HeterodyneSettings het{PhaseSpaceGrid{span, span, grid_n, grid_n}, 0.0};
  const PovmSet set = build_povm_set(het, FockDim(dim));
  DesignMatrix a = build_design_matrix(set);
  MeasurementVector b = build_measurement_vector(
      ideal_heterodyne_masses(rho, het.grid), Normalization::probabilities,
      set);
  return {std::move(a), std::move(b), std::move(rho)};
}

}  // namespace

TEST_CASE("simplex projection") {
  RealVector v(2);
  v << 1.0, -1.0;
  const RealVector p = simplex_project(v);
  CHECK(p(0) == doctest::Approx(1.0));
  CHECK(p(1) == doctest::Approx(0.0));

  RealVector already(3);
  already << 0.2, 0.5, 0.3;
  CHECK((simplex_project(already) - already).cwiseAbs().maxCoeff() < 1e-15);

  // projection is feasible and no random feasible point is closer
  Xoshiro256 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    RealVector x(5);
    for (int i = 0; i < 5; ++i) x(i) = 4.0 * rng.normal();
    const RealVector proj = simplex_project(x);
    CHECK(proj.minCoeff() >= 0.0);
    CHECK(proj.sum() == doctest::Approx(1.0));
    const double best = (proj - x).squaredNorm();
    for (int s = 0; s < 200; ++s) {
      RealVector y(5);
      for (int i = 0; i < 5; ++i) y(i) = rng.uniform();
      y /= y.sum();
      CHECK((y - x).squaredNorm() >= best - 1e-12);
    }
  }
}

TEST_CASE("spectrahedron projection") {
  SUBCASE("density matrices are fixed points") {
    Xoshiro256 rng(23);
    const Matrix rho = test::random_density(5, rng);
    CHECK((spectrahedron_project(rho).matrix() - rho).cwiseAbs().maxCoeff() <
          1e-12);
  }

  SUBCASE("diag(1, -1) goes to diag(1, 0)") {
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = -1.0;
    const Matrix p = spectrahedron_project(h).matrix();
    CHECK(std::abs(p(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(p(1, 1)) < 1e-14);
  }

  SUBCASE("sampling oracle on random Hermitian input") {
    Xoshiro256 rng(29);
    const Matrix h = 2.0 * test::random_hermitian(4, rng);
    const Matrix x = spectrahedron_project(h).matrix();
    const double best = (x - h).squaredNorm();
    double worst_inner = 1e9;
    for (int s = 0; s < 1000000; ++s) {
      const Matrix y = test::random_density(4, rng);
      CHECK((y - h).squaredNorm() >= best - 1e-8);
      // first-order optimality <x - h, y - x> >= 0 over the feasible set
      const double inner =
          (x - h).conjugate().cwiseProduct(y - x).sum().real();
      worst_inner = std::min(worst_inner, inner);
    }
    CHECK(worst_inner >= -1e-8);
  }

  SUBCASE("rejects clearly non-Hermitian input") {
    Matrix h = Matrix::Zero(3, 3);
    h(0, 1) = 1.0;  // h(1,0) stays 0
    CHECK_THROWS_AS(spectrahedron_project(h), std::invalid_argument);
  }
}

TEST_CASE("degenerate single-constraint problem") {
  // one operator = identity, datum 1: any state is optimal
  const int n = 4;
  PhaseSpaceGrid g{1.0, 1.0, 1, 1};
  PovmSet set{Scheme::heterodyne, FockDim(n),
              {Matrix::Identity(n, n)}, HeterodyneSettings{g, 0.0}};
  const DesignMatrix a = build_design_matrix(set);
  RealVector one(1);
  one << 1.0;
  const MeasurementVector b =
      build_measurement_vector(one, Normalization::probabilities, set);
  const ReconstructionResult r = reconstruct(a, b);
  CHECK(r.objective < 1e-12);
  CHECK(r.converged);
  r.rho.require_physical();
}

TEST_CASE("gradient matches central finite differences") {
  Xoshiro256 rng(31);
  const int n = 6;
  std::vector<Matrix> ops;
  for (int k = 0; k < 20; ++k) {
    Matrix g = test::random_ginibre(n, rng);
    ops.push_back(g * g.adjoint());
  }
  PovmSet set{Scheme::heterodyne, FockDim(n), ops,
              HeterodyneSettings{PhaseSpaceGrid{1.0, 1.0, 4, 5}, 0.0}};
  const DesignMatrix a = build_design_matrix(set);
  RealVector data(20);
  for (int k = 0; k < 20; ++k) data(k) = rng.uniform();
  const MeasurementVector b =
      build_measurement_vector(data, Normalization::densities, set);

  const Matrix x = test::random_density(n, rng);
  const Matrix grad = least_squares_gradient(a, b, x);

  for (int dir = 0; dir < 20; ++dir) {
    Matrix d = test::random_hermitian(n, rng);
    d /= d.norm();
    const double h = 1e-5;
    const double fp = least_squares_objective(a, b, x + h * d);
    const double fm = least_squares_objective(a, b, x - h * d);
    const double fd = (fp - fm) / (2.0 * h);
    const double analytic = grad.conjugate().cwiseProduct(d).sum().real();
    CHECK(std::abs(fd - analytic) <=
          1e-5 * std::max(1.0, std::abs(analytic)));
  }
}

TEST_CASE("reconstruct on exact data recovers the state") {
  const Problem p = make_problem(8);
  const ReconstructionResult r = reconstruct(p.a, p.b);
  CHECK(r.converged);
  r.rho.require_physical();
  CHECK((r.rho.matrix() - p.truth.matrix()).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(r.objective < 1e-15);
}

TEST_CASE("recorded objective sequence is monotone") {
  const Problem p = make_problem(6);
  std::vector<double> objectives;
  SolverConfig config;
  config.progress = [&](int, double f) { objectives.push_back(f); };
  reconstruct(p.a, p.b, config);
  REQUIRE(objectives.size() > 10);
  for (std::size_t i = 1; i < objectives.size(); ++i)
    CHECK(objectives[i] <= objectives[i - 1] + 1e-12);
}

TEST_CASE("feasibility holds even without convergence") {
  const Problem p = make_problem(8);
  SolverConfig config;
  config.max_iters = 3;
  const ReconstructionResult r = reconstruct(p.a, p.b, config);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
  r.rho.require_physical();
}

TEST_CASE("objective agrees across different feasible starts") {
  const Problem p = make_problem(8);
  Xoshiro256 rng(37);
  SolverConfig c1;
  c1.init = test::random_density(8, rng);
  SolverConfig c2;
  c2.init = test::random_density(8, rng);
  const double f1 = reconstruct(p.a, p.b, c1).objective;
  const double f2 = reconstruct(p.a, p.b, c2).objective;
  CHECK(std::abs(f1 - f2) <= 1e-8 * (1.0 + std::max(f1, f2)));
}

TEST_CASE("solver input validation") {
  const Problem p = make_problem(6);
  MeasurementVector bad = p.b;
  bad.values = RealVector::Zero(p.b.values.size() + 1);
  CHECK_THROWS_AS(reconstruct(p.a, bad), std::invalid_argument);

  MeasurementVector nonfinite = p.b;
  nonfinite.values(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(reconstruct(p.a, nonfinite), std::invalid_argument);

  SolverConfig bad_config;
  bad_config.max_iters = 0;
  CHECK_THROWS_AS(reconstruct(p.a, p.b, bad_config), std::invalid_argument);
}

TEST_CASE("optimality certificate") {
  const Problem p = make_problem(6);

  SUBCASE("converged run passes") {
    const ReconstructionResult r = reconstruct(p.a, p.b);
    const CertificateReport report = certify_optimality(r, p.a, p.b, 1000);
    CHECK(report.passed);
    CHECK(report.objective_violations == 0);
    CHECK(report.variational_violations == 0);
    CHECK(report.first_violation == -1);
  }

  SUBCASE("maximally mixed state on informative data fails") {
    ReconstructionResult fake;
    fake.rho = DensityMatrix(Matrix::Identity(6, 6) / 6.0);
    fake.converged = true;
    const CertificateReport report = certify_optimality(fake, p.a, p.b, 500);
    CHECK_FALSE(report.passed);
    CHECK(report.objective_violations > 0);
    CHECK(report.first_violation >= 0);
  }

  SUBCASE("early-stopped run reports the violating trial") {
    SolverConfig config;
    config.max_iters = 3;
    const ReconstructionResult r = reconstruct(p.a, p.b, config);
    const CertificateReport report = certify_optimality(r, p.a, p.b, 500);
    if (!report.passed) CHECK(report.first_violation >= 0);
  }
}
