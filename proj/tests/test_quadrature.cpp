#include <gtest/gtest.h>

#include <cmath>

#include "nedstokes/error.hpp"
#include "nedstokes/quadrature.hpp"

using namespace nedstokes;

namespace {

// int_T x^a y^b over the reference triangle = a! b! / (a + b + 2)!
double monomial_integral(int a, int b) {
  return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
}

}  // namespace

TEST(Quadrature, TriangleRulesIntegrateMonomialsExactly) {
  for (int d = 0; d <= kMaxTriangleDegree; ++d) {
    const auto& rule = triangle_quadrature(d);
    for (int a = 0; a <= d; ++a) {
      for (int b = 0; a + b <= d; ++b) {
        double sum = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
          sum += rule.weights[q] * std::pow(rule.points[q](0), a) * std::pow(rule.points[q](1), b);
        }
        const double exact = monomial_integral(a, b);
        EXPECT_NEAR(sum, exact, 1e-13 * exact) << "degree " << d << " x^" << a << " y^" << b;
      }
    }
  }
}

TEST(Quadrature, KnownIntegrals) {
  const auto& r = triangle_quadrature(6);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) {
    const double x = r.points[q](0), y = r.points[q](1);
    s1 += r.weights[q] * x * x * y;
    s2 += r.weights[q] * x * x * x * y * y * y;
  }
  EXPECT_NEAR(s1, 1.0 / 60.0, 1e-15);
  EXPECT_NEAR(s2, 1.0 / 1120.0, 1e-16);
}

TEST(Quadrature, PointsInsideAndWeightsPositive) {
  for (int d = 0; d <= kMaxTriangleDegree; ++d) {
    for (std::size_t q = 0; q < triangle_quadrature(d).size(); ++q) {
      const auto& r = triangle_quadrature(d);
      EXPECT_GT(r.weights[q], 0.0);
      EXPECT_GT(r.points[q](0), 0.0);
      EXPECT_GT(r.points[q](1), 0.0);
      EXPECT_LT(r.points[q].sum(), 1.0);
    }
  }
}

TEST(Quadrature, DegreeOutOfRangeIsConfigurationError) {
  try {
    (void)triangle_quadrature(11);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Configuration);
  }
}

TEST(Quadrature, GaussLegendreExactness) {
  for (int deg = 0; deg <= 21; ++deg) {
    const auto& g = gauss_quadrature(deg);
    for (int p = 0; p <= deg; ++p) {
      double s = 0.0;
      for (std::size_t q = 0; q < g.size(); ++q) s += g.weights[q] * std::pow(g.points[q], p);
      EXPECT_NEAR(s, 1.0 / (p + 1), 1e-14);
    }
  }
}
