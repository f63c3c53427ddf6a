#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace cvtomo::detail {

// Adaptive Gauss-Kronrod (15-point) on a finite interval. The tolerance is
// boost's relative-to-L1 criterion; with the bounded integrands used here
// (|integrand| <= 1 pointwise) it acts as an absolute tolerance.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol = 1e-12) {
  if (!(a < b)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      std::forward<F>(f), a, b, /*max_depth=*/14, tol);
}

}  // namespace cvtomo::detail
