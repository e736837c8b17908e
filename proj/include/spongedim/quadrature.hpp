#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "spongedim/error.hpp"

namespace spongedim {

inline constexpr double kQuadratureTol = 1e-10;

/// Adaptive 15-point Gauss-Kronrod integral of f over [a, b].
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = kQuadratureTol) {
  if (a == b) return 0.0;
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 30, rel_tol, &error);
  if (!std::isfinite(value) || error > 10.0 * rel_tol * std::max(std::abs(value), std::numeric_limits<double>::min()))
    fail(ErrorKind::QuadratureFailure, "integral over [" + std::to_string(a) + ", " + std::to_string(b) + "] did not reach tolerance");
  return value;
}

/// int_a^b dt / log t for 1 < a <= b.
inline double log_integral(double a, double b) {
  if (!(a > 1.0) || b < a) fail(ErrorKind::QuadratureFailure, "log integral needs 1 < a <= b");
  return integrate([](double t) { return 1.0 / std::log(t); }, a, b);
}

}  // namespace spongedim
