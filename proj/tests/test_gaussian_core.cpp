#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cvct/gaussian_core.hpp"
#include "oracles.hpp"

using namespace cvct;

TEST(SqueezedVacuumWavefunction, VacuumPeak) {
  EXPECT_NEAR(squeezed_vacuum_wavefunction(0.0, 0.0), std::pow(1.0 / (2.0 * kPi), 0.25), 1e-15);
}

TEST(SqueezedVacuumWavefunction, SquareIsNormalized) {
  for (double r2 : {-1.0, 0.0, 1.0}) {
    const double total = oracle::trapezoid(
        [&](double q) { return std::pow(squeezed_vacuum_wavefunction(r2, q), 2); }, -40.0, 40.0);
    EXPECT_NEAR(total, 1.0, 1e-12) << "r2 = " << r2;
  }
}

TEST(SqueezedVacuumWavefunction, MatchesNormalDensityRoot) {
  // f_G^2 is a normal density of variance e^{-2 r2}.
  const double r2 = 0.5, q = 1.0;
  const double expected = std::sqrt(oracle::normal_pdf(q, 0.0, std::exp(-2.0 * r2)));
  EXPECT_NEAR(squeezed_vacuum_wavefunction(r2, q), expected, 1e-15);
}

TEST(HeatKernel, Values) {
  EXPECT_NEAR(heat_kernel(0.5, 0.0), 1.0 / std::sqrt(2.0 * kPi), 1e-15);
  for (double t : {0.1, 0.7, 3.0})
    for (double q : {-2.0, 0.0, 0.4, 5.0}) {
      const double r2 = -0.5 * std::log(2.0 * t);
      EXPECT_NEAR(heat_kernel(t, q), std::pow(squeezed_vacuum_wavefunction(r2, q), 2), 1e-14);
    }
  for (double t : {0.1, 1.0, 10.0})
    EXPECT_NEAR(oracle::trapezoid([&](double q) { return heat_kernel(t, q); }, -200.0, 200.0), 1.0, 1e-10);
  EXPECT_THROW(heat_kernel(0.0, 1.0), DomainError);
}

TEST(Gaussian1D, UnitWeightIntegratesToOne) {
  const Gaussian1D g{1.5, 0.3, 0.0};
  EXPECT_NEAR(oracle::trapezoid([&](double q) { return g.density(q); }, -20.0, 20.0), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(g.mean(), -1.5);
  EXPECT_NEAR(g.amplitude(0.2) * g.amplitude(0.2), g.density(0.2), 1e-15);
}

TEST(GaussianProduct, SingleInputUnchanged) {
  const auto r = gaussian_product(std::vector<GaussianInput>{{0.7, 1.3}});
  EXPECT_EQ(r.composite.variance, 0.7);
  EXPECT_EQ(r.composite.center, 1.3);
  EXPECT_EQ(r.scale_log, 0.0);
}

TEST(GaussianProduct, IdenticalPair) {
  const auto r = gaussian_product(std::vector<GaussianInput>{{1.0, 0.8}, {1.0, 0.8}});
  EXPECT_NEAR(r.composite.variance, 0.5, 1e-15);
  EXPECT_NEAR(r.composite.center, 0.8, 1e-15);
}

TEST(GaussianProduct, ScaleMatchesDenseGridProduct) {
  const std::vector<GaussianInput> in{{1.0, 0.0}, {1.0, 2.0}};
  const auto r = gaussian_product(in);
  EXPECT_NEAR(r.composite.variance, 0.5, 1e-15);
  EXPECT_NEAR(r.composite.center, 1.0, 1e-15);
  for (int i = 0; i <= 400; ++i) {
    const double q = -8.0 + 0.04 * i;
    const double direct = oracle::normal_pdf(q, 0.0, 1.0) * oracle::normal_pdf(q, -2.0, 1.0);
    const double composite = std::exp(r.scale_log) * r.composite.density(q);
    EXPECT_NEAR(composite / direct, 1.0, 1e-12) << "q = " << q;
  }
}

TEST(GaussianProduct, AgreesWithPairwiseFold) {
  auto g = oracle::rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial;
    std::vector<GaussianInput> in;
    std::vector<std::pair<double, double>> factors;
    for (int i = 0; i < n; ++i) {
      const double v = std::exp(-2.0 * oracle::uniform(g, -1.0, 1.0));
      const double c = oracle::uniform(g, -3.0, 3.0);
      in.push_back({v, c});
      factors.push_back({-c, v});
    }
    const auto r = gaussian_product(in);
    const auto ref = oracle::pairwise_fold(factors);
    EXPECT_NEAR(r.composite.variance / ref.var, 1.0, 1e-12);
    EXPECT_NEAR(r.composite.mean(), ref.mean, 1e-11);
    EXPECT_NEAR(r.scale_log, ref.log_w, 1e-10 * std::max(1.0, std::abs(ref.log_w)));
  }
}

TEST(GaussianProduct, VarianceIsHarmonicCombination) {
  const std::vector<GaussianInput> in{{0.3, 0.1}, {2.0, -1.0}, {0.9, 0.4}};
  const auto r = gaussian_product(in);
  EXPECT_NEAR(r.composite.variance, 1.0 / (1.0 / 0.3 + 1.0 / 2.0 + 1.0 / 0.9), 1e-15);
}

TEST(GaussianProduct, RejectsBadInput) {
  EXPECT_THROW(gaussian_product(std::vector<GaussianInput>{}), UsageError);
  EXPECT_THROW(gaussian_product(std::vector<GaussianInput>{{0.0, 1.0}}), DomainError);
}

TEST(UniformChainParams, Values) {
  const auto one = uniform_chain_params(1, 0.0, 3.0);
  EXPECT_DOUBLE_EQ(one.variance, 1.0);
  EXPECT_DOUBLE_EQ(one.center, 3.0);
  const auto four = uniform_chain_params(4, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(four.variance, 0.25);
  EXPECT_DOUBLE_EQ(four.center, 1.0);
  const double v = std::exp(-1.0);
  const auto prod = gaussian_product(std::vector<GaussianInput>{{v, 0.0}, {v, 0.0}, {v, 0.0}});
  const auto three = uniform_chain_params(3, 0.5, 0.0);
  EXPECT_NEAR(three.variance, prod.composite.variance, 1e-15);
  EXPECT_NEAR(three.center, prod.composite.center, 1e-15);
  EXPECT_THROW(uniform_chain_params(0, 0.0, 0.0), UsageError);
}
