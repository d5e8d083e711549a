#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dsse/quadrature.hpp"

using namespace dsse;

TEST(Quadrature, Polynomial) {
  const QuadratureResult q = integrate([](double x) { return x * x * x - 2 * x; }, -1.0, 3.0);
  EXPECT_NEAR(q.value, 12.0, 1e-12);
  EXPECT_TRUE(q.converged);
}

TEST(Quadrature, InfiniteRange) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto q = integrate([](double x) { return std::exp(-0.5 * x * x); }, -inf, inf);
  EXPECT_NEAR(q.value, std::sqrt(2 * M_PI), 1e-12);
  const auto h = integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, inf);
  EXPECT_NEAR(h.value, M_PI / 2, 1e-11);
}

TEST(Quadrature, Kink) {
  const double pts[] = {-2.0, 0.0, 1.0};
  const auto q = integrate_piecewise([](double x) { return std::abs(x); }, pts);
  EXPECT_NEAR(q.value, 2.5, 1e-14);
}

TEST(Quadrature, ReportsFailure) {
  QuadratureOptions o;
  o.max_subdivisions = 3;
  const auto q = integrate([](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)); }, 0.0, 1.0, o);
  EXPECT_FALSE(q.converged);
}
