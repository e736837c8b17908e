#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/special_functions/expint.hpp>

#include "spongedim/quadrature.hpp"

using namespace spongedim;

namespace {

// li(b) - li(a) = Ei(log b) - Ei(log a).
double li_difference(double a, double b) { return boost::math::expint(std::log(b)) - boost::math::expint(std::log(a)); }

}  // namespace

TEST(Quadrature, LogIntegralAgainstExponentialIntegral) {
  EXPECT_NEAR(log_integral(50, 100), li_difference(50, 100), 1e-9);
  EXPECT_NEAR(log_integral(50, 100), 11.6574452, 1e-6);
  for (double a : {1.5, 2.0, 10.0, 1e3})
    for (double b : {a, 2 * a, 1e4, 1e6}) {
      if (b < a) continue;
      EXPECT_NEAR(log_integral(a, b), li_difference(a, b), 1e-9 * std::max(1.0, li_difference(a, b)));
    }
}

TEST(Quadrature, Polynomial) {
  EXPECT_NEAR(integrate([](double t) { return 3 * t * t; }, 0.0, 2.0), 8.0, 1e-12);
  EXPECT_EQ(integrate([](double t) { return t; }, 1.0, 1.0), 0.0);
}

TEST(Quadrature, RejectsBadRanges) {
  try {
    log_integral(1.0, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::QuadratureFailure);
  }
  EXPECT_THROW(log_integral(3.0, 2.0), Error);
}

TEST(Quadrature, NonFiniteIntegrand) {
  try {
    integrate([](double t) { return 1.0 / (t - 1.0); }, 1.0, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::QuadratureFailure);
  }
}
