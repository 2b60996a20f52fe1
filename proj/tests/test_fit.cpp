#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nedstokes/error.hpp"
#include "nedstokes/fit.hpp"

using namespace nedstokes;

TEST(Fit, ExactPowerLaws) {
  std::vector<std::pair<double, double>> p;
  for (double h : {0.1, 0.05, 0.025}) p.emplace_back(h, h * h);
  EXPECT_NEAR(fit_order(p).slope, 2.0, 1e-10);
  EXPECT_LT(fit_order(p).residual, 1e-12);
  p.clear();
  for (double h : {0.1, 0.05, 0.025, 0.0125}) p.emplace_back(h, 3.0 * std::pow(h, 1.08));
  EXPECT_NEAR(fit_order(p).slope, 1.08, 1e-10);
  EXPECT_NEAR(std::exp(fit_order(p).intercept), 3.0, 1e-10);
}

TEST(Fit, TableSeriesOrder) {
  // Lowest eigenvalue of the bi-unit square, lowest-order scheme, N = 20..50.
  const double extr = 13.08617;
  const std::vector<std::pair<double, double>> p = {
      {2.0 / 20, extr - 13.07172}, {2.0 / 30, extr - 13.07948}, {2.0 / 40, extr - 13.08235}, {2.0 / 50, extr - 13.08371}};
  EXPECT_NEAR(fit_order(p).slope, 1.88, 0.1);
}

TEST(Fit, RejectsBadInput) {
  EXPECT_THROW(fit_order({{0.1, 1.0}}), Error);
  EXPECT_THROW(fit_order({{0.1, 1.0}, {0.05, 0.0}}), Error);
  EXPECT_THROW(fit_order({{-0.1, 1.0}, {0.05, 1.0}}), Error);
  EXPECT_THROW(extrapolate({{0.1, 1.0}, {0.05, 1.0}}), Error);
}

TEST(Fit, ExtrapolatesSyntheticSeries) {
  std::vector<std::pair<double, double>> p;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) p.emplace_back(h, 10.0 + h * h);
  const auto e = extrapolate(p);
  EXPECT_NEAR(e.lambda, 10.0, 1e-8);
  EXPECT_NEAR(e.c, 1.0, 1e-8);
  EXPECT_NEAR(e.t, 2.0, 1e-8);
  EXPECT_TRUE(e.t_defined);

  p.clear();
  for (double h : {0.2, 0.1, 0.05}) p.emplace_back(h, 4.0 - 2.5 * std::pow(h, 3.3));
  const auto f = extrapolate(p);
  EXPECT_NEAR(f.lambda, 4.0, 1e-8);
  EXPECT_NEAR(f.t, 3.3, 1e-6);
}

TEST(Fit, ExtrapolationIsStableUnderSmallNoise) {
  std::mt19937 rng(11);
  std::normal_distribution<double> noise(0.0, 1e-9);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::pair<double, double>> p;
    for (double h : {0.1, 0.0667, 0.05, 0.04}) p.emplace_back(h, 13.0 + 0.3 * h * h + noise(rng));
    const auto e = extrapolate(p);
    EXPECT_NEAR(e.lambda, 13.0, 1e-6);
    EXPECT_NEAR(e.t, 2.0, 0.05);
  }
}

TEST(Fit, ConstantSeriesHasUndefinedOrder) {
  const auto e = extrapolate({{0.1, 5.0}, {0.05, 5.0}, {0.025, 5.0}});
  EXPECT_EQ(e.lambda, 5.0);
  EXPECT_EQ(e.c, 0.0);
  EXPECT_FALSE(e.t_defined);
  EXPECT_TRUE(std::isnan(e.t));
}
