#pragma once

// Shared test utilities. The quadrature and statistics oracles here are
// deliberately independent of the library's numerical paths.

#include <cmath>
#include <functional>

#include <boost/math/distributions/chi_squared.hpp>

#include "cvtomo/rng.hpp"
#include "cvtomo/types.hpp"

namespace cvtomo::test {

/// Composite Simpson quadrature oracle on [a, b] with n panels (n even).
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

inline Matrix random_ginibre(int n, Xoshiro256& rng) {
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  return g;
}

/// Random density matrix, GG^dag normalized.
inline Matrix random_density(int n, Xoshiro256& rng) {
  Matrix g = random_ginibre(n, rng);
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline Matrix random_hermitian(int n, Xoshiro256& rng) {
  return hermitize(random_ginibre(n, rng));
}

/// Haar-ish random unitary from the QR of a Ginibre matrix.
inline Matrix random_unitary(int n, Xoshiro256& rng) {
  const Matrix g = random_ginibre(n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  return q;
}

/// Upper-tail p-value of a chi-square statistic.
inline double chi_squared_pvalue(double statistic, double dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

}  // namespace cvtomo::test
