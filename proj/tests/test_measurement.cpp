#include <gtest/gtest.h>

#include <cmath>

#include "cvct/measurement.hpp"
#include "oracles.hpp"

using namespace cvct;

TEST(OutcomeDistribution, NarrowInputReproducesEnvelope) {
  const Density rho = gaussian_density(0.0, 1e-6);
  for (double p1 : {-2.0, -0.3, 0.0, 1.5})
    EXPECT_NEAR(outcome_distribution(rho, SqueezedVacuum{0.0}, p1),
                oracle::gaussian_outcome_density(p1, 0.0, 1e-6, 1.0), 1e-10);
}

TEST(OutcomeDistribution, SqueezedCoherentMatchesConvolution) {
  auto g = oracle::rng(21);
  for (int i = 0; i < 10; ++i) {
    const SqueezedCoherent s{oracle::uniform(g, -2, 2), oracle::uniform(g, -2, 2), oracle::uniform(g, -1, 1),
                             oracle::uniform(g, 0, 2 * kPi)};
    const SqueezedVacuum vac{oracle::uniform(g, -1, 1)};
    for (double p1 = -6.0; p1 <= 6.0; p1 += 0.75) {
      const double ref = oracle::gaussian_outcome_density(p1, s.q0, oracle::rotated_position_variance(s.r1, s.theta),
                                                          std::exp(-2 * vac.r2));
      EXPECT_NEAR(outcome_distribution(s, vac, p1) / ref, 1.0, 1e-8);
      EXPECT_NEAR(outcome_distribution_closed(s, vac, p1) / ref, 1.0, 1e-12);
    }
  }
}

TEST(OutcomeDistribution, TotalProbability) {
  const SqueezedCoherent s{0.5, 0.0, 0.4, 1.0};
  const SqueezedVacuum vac{-0.3};
  const double total = oracle::trapezoid([&](double p) { return outcome_distribution(s, vac, p); }, -20.0, 20.0, 2001);
  EXPECT_NEAR(total, 1.0, 1e-6);
}

TEST(OutcomeDistributionClosed, ValuesAndPeak) {
  EXPECT_NEAR(outcome_distribution_closed({}, SqueezedVacuum{0.0}, 0.0), 1.0 / std::sqrt(4.0 * kPi), 1e-15);
  const SqueezedCoherent s{1.3, 0.0, 0.2, 0.5};
  const double at = outcome_distribution_closed(s, SqueezedVacuum{0.1}, -1.3);
  EXPECT_GT(at, outcome_distribution_closed(s, SqueezedVacuum{0.1}, -1.3 + 1e-3));
  EXPECT_GT(at, outcome_distribution_closed(s, SqueezedVacuum{0.1}, -1.3 - 1e-3));
}

TEST(TeleportProbability, Limits) {
  const SqueezedCoherent s{0.4, 0.0, 0.3, 1.0};
  const SqueezedVacuum vac{0.2};
  EXPECT_NEAR(teleport_probability(s, vac, {-0.4, 60.0}), 1.0, 1e-6);
  EXPECT_LT(teleport_probability(s, vac, {-0.4, 1e-9}), 1e-9);
  EXPECT_THROW(teleport_probability(s, vac, {-0.4, 0.0}), DomainError);
  EXPECT_NEAR(teleport_probability_closed(s, vac, 1e6), 1.0, 1e-15);
}

TEST(TeleportProbability, ErfLawWhenCenteredOnPeak) {
  for (double r2 : {-0.8, 0.0, 0.9})
    for (double width : {0.3, 1.0, 2.5}) {
      const SqueezedCoherent s{0.7, 0.2, -0.4, 2.0};
      const SqueezedVacuum vac{r2};
      EXPECT_NEAR(teleport_probability(s, vac, {-0.7, width}), teleport_probability_closed(s, vac, width), 1e-8);
    }
  // V_s^2 = 1, delta_q^2 = 0.25, width 2.
  const SqueezedCoherent s{0.0, 0.0, std::log(2.0), 0.0};
  EXPECT_NEAR(position_variance(s), 0.25, 1e-15);
  EXPECT_NEAR(teleport_probability(s, SqueezedVacuum{0.0}, {0.0, 2.0}), std::erf(std::sqrt(0.8) / std::sqrt(2.0)), 1e-8);
}

TEST(TeleportProbability, MonotoneInWidthAndSqueezing) {
  const SqueezedCoherent s{0.5, 0.0, 0.2, 0.7};
  double prev = 0.0;
  for (int i = 1; i <= 12; ++i) {
    const double p = teleport_probability(s, SqueezedVacuum{0.0}, {0.1, 0.25 * i});
    EXPECT_GE(p, prev);
    prev = p;
  }
  prev = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double p = teleport_probability_closed(s, SqueezedVacuum{-1.0 + 0.2 * i}, 1.0);
    EXPECT_GE(p, prev);
    prev = p;
  }
}

TEST(TeleportProbability, ComplementaryWindowsSumToOne) {
  const SqueezedCoherent s{0.5, 0.0, 0.2, 0.7};
  const SqueezedVacuum vac{0.3};
  const Tolerance tight{1e-14, 1e-12};
  const SelectivityWindow w{0.2, 1.1};
  const double yes = teleport_probability(s, vac, w, tight);
  const double below = teleport_probability(s, vac, {w.lower() - 20.0, 40.0}, tight);
  const double above = teleport_probability(s, vac, {w.upper() + 20.0, 40.0}, tight);
  EXPECT_NEAR(yes + below + above, 1.0, 1e-10);
}

TEST(OptimizeWindowCenter, SqueezedCoherentPeaksAtMinusQ0) {
  for (double q0 : {-1.2, 0.3, 2.0}) {
    const SqueezedCoherent s{q0, 0.5, 0.4, 1.3};
    EXPECT_NEAR(optimize_window_center(s, SqueezedVacuum{0.2}, 1.0), -q0, 1e-5);
  }
}

TEST(OptimizeWindowCenter, SymmetricInputAtOrigin) {
  // A symmetric two-peak density.
  const Density rho{[](double q) { return 0.5 * (oracle::normal_pdf(q, -1.0, 0.3) + oracle::normal_pdf(q, 1.0, 0.3)); },
                    0.0, std::sqrt(1.3)};
  EXPECT_NEAR(optimize_window_center(rho, SqueezedVacuum{0.0}, 0.8), 0.0, 1e-5);
}

TEST(WindowProject, IdempotentIdentityAndNorm) {
  const std::size_t n = 4096;
  const Grid1D g = Grid1D::centered(0.0, std::sqrt(4.0 * kPi / n), n);
  const SqueezedCoherent s{0.0, 0.4, 0.3, 0.0};
  const auto m = fourier_transform(sample(as_wavefunction(s), g));
  const SelectivityWindow w{0.2, 1.5};
  const auto once = window_project(m, w);
  const auto twice = window_project(once, w);
  EXPECT_EQ(once.amplitudes, twice.amplitudes);
  const auto all = window_project(m, {0.0, 2.0 * m.grid.extent()});
  EXPECT_EQ(all.amplitudes, m.amplitudes);
  // Momentum density of the state is N(p; p0, delta_p^2).
  const double sd = std::sqrt(momentum_variance(s));
  const double exact = 0.5 * (std::erf((w.upper() - s.p0) / (sd * std::sqrt(2.0))) -
                              std::erf((w.lower() - s.p0) / (sd * std::sqrt(2.0))));
  EXPECT_NEAR(once.norm_squared(), exact, 2.0 * m.grid.step);
  EXPECT_THROW(window_project(sample(as_wavefunction(s), g), w), UsageError);
}

TEST(QuasiSelectiveVariation, ShrinksWithWidth) {
  const Density rho = as_density({0.5, 0.0, 0.2, 0.4});
  const double wide = quasi_selective_variation(rho, SqueezedVacuum{0.0}, {0.0, 2.0});
  const double narrow = quasi_selective_variation(rho, SqueezedVacuum{0.0}, {0.0, 0.01});
  EXPECT_GT(wide, narrow);
  EXPECT_LT(narrow, 0.01);
}

TEST(MaximizeScalar, RefinesBetweenScanPoints) {
  const auto r = maximize_scalar([](double x) { return -std::pow(x - 0.31371, 2) + 0.1 * std::cos(x); }, -1.0, 1.0);
  // d/dx: -2 (x - 0.31371) - 0.1 sin x = 0.
  double x = 0.3;
  for (int i = 0; i < 50; ++i) x -= (-2 * (x - 0.31371) - 0.1 * std::sin(x)) / (-2 - 0.1 * std::cos(x));
  EXPECT_NEAR(r.argmax, x, 1e-6);
  EXPECT_GT(r.iterations, 0);
  EXPECT_THROW(maximize_scalar([](double x) { return x; }, 0.0, 1.0), SearchError);
}

TEST(OptimizeWindowCenter, SkewedDensityAgainstDenseScan) {
  // Hints deliberately off the true optimum so the search has to move.
  const Density rho{[](double q) { return 0.7 * oracle::normal_pdf(q, 0.4, 0.1) + 0.3 * oracle::normal_pdf(q, 1.6, 0.5); },
                    0.9, 0.8};
  const SqueezedVacuum vac{0.3};
  const double width = 0.6;
  const double env = vac.position_variance();
  // P(p1) for this mixture is a mixture of normals N(p1; -m_i, env + v_i); integrate it over the window.
  auto p_tel = [&](double c) {
    auto cdf = [&](double x) {
      return 0.7 * 0.5 * std::erfc(-(x + 0.4) / std::sqrt(2 * (env + 0.1))) +
             0.3 * 0.5 * std::erfc(-(x + 1.6) / std::sqrt(2 * (env + 0.5)));
    };
    return cdf(c + width / 2) - cdf(c - width / 2);
  };
  double best = -3.0;
  for (double c = -3.0; c <= 1.0; c += 1e-5)
    if (p_tel(c) > p_tel(best)) best = c;
  EXPECT_NEAR(optimize_window_center(rho, vac, width), best, 1e-4);
}
