#include <gtest/gtest.h>

#include "msl/odpu.hpp"

using namespace msl;

namespace {
GroupSpec two(double mu0, double s0, std::size_t n0, double mu1, double s1, std::size_t n1) {
  return GroupSpec{{{mu0, s0, n0}, {mu1, s1, n1}}};
}
double binomial_se(double p, std::size_t trials) { return std::sqrt(std::max(p * (1 - p), 1e-12) / double(trials)); }
}  // namespace

TEST(Odpu, SymmetricGroupsGiveHalf) {
  EXPECT_NEAR(odpu_quadrature(two(1.0, 0.1, 50, 1.0, 0.1, 50)), 0.5, 1e-6);
  EXPECT_NEAR(odpu_quadrature(two(0.0, 1.0, 1, 0.0, 1.0, 1)), 0.5, 1e-6);
}

TEST(Odpu, WellSeparatedIsNegligible) {
  EXPECT_LT(odpu_quadrature(two(1.0, 0.05, 50, 0.4, 0.05, 50)), 1e-6);
}

TEST(Odpu, FewerOptimalChoosersRaiseUncertainty) {
  EXPECT_GT(odpu_quadrature(two(1.0, 0.05, 5, 0.4, 0.3, 95)), odpu_quadrature(two(1.0, 0.05, 50, 0.4, 0.3, 50)));
}

TEST(Odpu, HighUncertaintyRegime) {
  double v = odpu_quadrature(two(1.0, 0.05, 50, 0.9, 0.5, 50));
  EXPECT_GT(v, 0.1);
  EXPECT_LT(v, 1.0);
}

// single-sample groups: P(X1 > X0) = Phi((mu1 - mu0) / sqrt(s0^2 + s1^2))
TEST(Odpu, SingleSampleClosedForm) {
  for (double gap : {0.0, 0.3, 1.0, 2.5}) {
    double s0 = 0.4, s1 = 0.7;
    double expect = 0.5 * std::erfc(gap / std::sqrt(s0 * s0 + s1 * s1) / std::sqrt(2.0));
    EXPECT_NEAR(odpu_quadrature(two(gap, s0, 1, 0.0, s1, 1)), expect, 1e-7);
  }
}

TEST(Odpu, MonteCarloSymmetry) {
  Rng rng(1);
  EXPECT_NEAR(odpu_monte_carlo(two(0.0, 1.0, 3, 0.0, 1.0, 3), 1000000, rng), 0.5, 0.002);
}

TEST(Odpu, QuadratureAgreesWithMonteCarlo) {
  Rng rng(2);
  const std::size_t trials = 200000;
  for (double s0 : {0.05, 0.25, 0.45})
    for (double s1 : {0.05, 0.25, 0.45}) {
      auto spec = two(1.0, s0, 50, 0.4, s1, 50);
      double q = odpu_quadrature(spec);
      double mc = odpu_monte_carlo(spec, trials, rng);
      EXPECT_LE(std::abs(q - mc), 3.0 * binomial_se(q, trials) + 1e-9) << s0 << " " << s1;
    }
}

TEST(Odpu, ThreeGroupsAgreeWithMonteCarlo) {
  Rng rng(3);
  GroupSpec spec{{{1.0, 0.1, 20}, {0.8, 0.3, 10}, {0.6, 0.5, 5}}};
  double q = odpu_quadrature(spec);
  double mc = odpu_monte_carlo(spec, 200000, rng);
  EXPECT_LE(std::abs(q - mc), 3.0 * binomial_se(q, 200000));
}

TEST(Odpu, TranslationInvariance) {
  for (double c : {-5.0, 0.3, 10.0})
    EXPECT_NEAR(odpu_quadrature(two(1.0 + c, 0.1, 30, 0.8 + c, 0.3, 30)), odpu_quadrature(two(1.0, 0.1, 30, 0.8, 0.3, 30)),
                1e-7);
}

TEST(Odpu, MonotoneOnGrids) {
  double prev = -1.0;
  for (double s = 0.05; s <= 1.0; s += 0.05) {
    double v = odpu_quadrature(two(1.0, 0.05, 50, 0.4, s, 50));
    EXPECT_GE(v, prev - 1e-9);
    prev = v;
  }
  prev = -1.0;
  for (std::size_t n = 1; n <= 100; n += 9) {
    double v = odpu_quadrature(two(1.0, 0.1, 50, 0.7, 0.3, n));
    EXPECT_GE(v, prev - 1e-9);
    prev = v;
  }
  prev = 2.0;
  for (std::size_t m = 1; m <= 100; m += 9) {
    double v = odpu_quadrature(two(1.0, 0.1, m, 0.7, 0.3, 50));
    EXPECT_LE(v, prev + 1e-9);
    prev = v;
  }
  prev = 2.0;
  for (double gap = 0.0; gap <= 1.0; gap += 0.1) {
    double v = odpu_quadrature(two(gap, 0.2, 50, 0.0, 0.2, 50));
    EXPECT_LE(v, prev + 1e-9);
    prev = v;
  }
}

TEST(Odpu, BoundedAndFlooredSigma) {
  double v = odpu_quadrature(two(1.0, 0.0, 50, 0.4, 0.0, 50));
  EXPECT_GE(v, 0.0);
  EXPECT_LE(v, 1e-9);
  EXPECT_NEAR(odpu_quadrature(two(1.0, 0.0, 5, 1.0, 0.3, 5)), 1.0 - std::pow(0.5, 5), 1e-6);
}

TEST(Odpu, Validation) {
  EXPECT_THROW(odpu_quadrature(GroupSpec{{{1.0, 0.1, 1}}}), ConfigError);
  EXPECT_THROW(odpu_quadrature(two(1.0, 0.1, 0, 0.4, 0.1, 1)), ConfigError);
  EXPECT_THROW(odpu_quadrature(two(1.0, -0.1, 1, 0.4, 0.1, 1)), ConfigError);
}

TEST(OdpuEstimates, PassThroughAndReorder) {
  double direct = odpu_quadrature(two(1.0, 0.1, 40, 0.8, 0.3, 60), 1e-8);
  EXPECT_DOUBLE_EQ(odpu_from_estimates({1.0, 0.8}, {0.1, 0.3}, {40, 60}), direct);
  EXPECT_DOUBLE_EQ(odpu_from_estimates({0.8, 1.0}, {0.3, 0.1}, {60, 40}), direct);
  EXPECT_LT(odpu_from_estimates({1.0, 0.4}, {0.05, 0.05}, {50, 50}), 1e-6);
}

TEST(OdpuEstimates, UnobservedArmsDropped) {
  EXPECT_EQ(odpu_from_estimates({1.0, 0.4}, {0.1, 0.1}, {100, 0}), 0.0);
  EXPECT_DOUBLE_EQ(odpu_from_estimates({1.0, 5.0, 0.8}, {0.1, 0.1, 0.3}, {40, 0, 60}),
                   odpu_quadrature(two(1.0, 0.1, 40, 0.8, 0.3, 60), 1e-8));
}
