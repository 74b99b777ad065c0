#include <gtest/gtest.h>

#include <cmath>

#include "cvct/grid_oracle.hpp"
#include "cvct/teleport.hpp"
#include "oracles.hpp"

using namespace cvct;

namespace {

const double kCoherent = 2.0 * std::sqrt(2.0) / 3.0;

double phase_free_distance(const GridWavefunction& a, const std::function<cplx(double)>& f) {
  cplx inner = 0.0;
  double na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < a.grid.size; ++j) {
    const cplx b = f(a.grid.point(j));
    inner += std::conj(a.amplitudes[j]) * b;
    na += std::norm(a.amplitudes[j]);
    nb += std::norm(b);
  }
  const double overlap = std::abs(inner) / std::sqrt(na * nb);
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * overlap));
}

}  // namespace

TEST(SingleCluster, ProbabilityMatchesClosedForm) {
  const SqueezedCoherent s{0.4, -0.2, 0.3, 1.0};
  const SqueezedVacuum vac{0.2};
  const auto run = run_single_cluster(as_wavefunction(s), vac, {-0.4, 1.0});
  EXPECT_NEAR(run.p_tel, teleport_probability_closed(s, vac, 1.0), 1e-4);
}

TEST(SingleCluster, FullWindowKeepsEverything) {
  const SqueezedCoherent s{0.0, 0.0, 0.0, 0.0};
  const auto run = run_single_cluster(as_wavefunction(s), SqueezedVacuum{0.0}, {0.0, 16.0});
  EXPECT_NEAR(run.p_tel, 1.0, 1e-6);
}

TEST(SingleCluster, ConditionalStatesMatchAnalyticOnes) {
  const SqueezedCoherent s{0.3, 0.5, -0.2, 2.0};
  const SqueezedVacuum vac{0.1};
  const Wavefunction psi = as_wavefunction(s);
  const double samples[2] = {-0.8, 0.2};
  const auto run = run_single_cluster(psi, vac, {-0.3, 2.0}, samples);
  ASSERT_EQ(run.slices.size(), 2u);
  for (const auto& sl : run.slices) {
    EXPECT_NEAR(sl.density, outcome_distribution(s, vac, sl.p1), 1e-4);
    const Wavefunction expected = post_measurement_wavefunction(psi, vac, sl.p1);
    const auto corrected = apply_x(sl.state, -sl.p1);
    EXPECT_LT(phase_free_distance(corrected, expected.amplitude), 1e-6) << sl.p1;
  }
}

TEST(OracleFidelity, CoherentConstant) {
  EXPECT_NEAR(oracle_fidelity(as_wavefunction({}), SqueezedVacuum{0.0}, 0.0), kCoherent, 1e-4);
}

TEST(OracleFidelity, MatchesQuadratureOnRandomPoints) {
  auto g = oracle::rng(61);
  for (int i = 0; i < 4; ++i) {
    const SqueezedCoherent s{oracle::uniform(g, -1, 1), oracle::uniform(g, -1, 1), oracle::uniform(g, -1, 1),
                             oracle::uniform(g, 0, 2 * kPi)};
    const SqueezedVacuum vac{oracle::uniform(g, -1, 1)};
    const double p1 = oracle::uniform(g, -3, 3) - s.q0;
    EXPECT_NEAR(oracle_fidelity(as_wavefunction(s), vac, p1), fidelity(s, vac, p1), 1e-4);
  }
}

TEST(OracleFidelity, IdealClusterLimit) {
  EXPECT_GE(oracle_fidelity(as_wavefunction({0.2, 0.0, 0.3, 1.0}), SqueezedVacuum{-5.0}, -0.2), 0.999);
}

TEST(Wigner, VacuumValuesAndNormalization) {
  const Wavefunction vac = as_wavefunction({});
  for (auto [q, p] : {std::pair{0.0, 0.0}, {1.0, -0.5}, {-2.0, 1.5}})
    EXPECT_NEAR(wigner_function(vac, q, p), std::exp(-(q * q + p * p) / 2.0) / (2.0 * kPi), 1e-10);
  const std::size_t n = 256;
  const auto w = wigner_grid(sample(vac, Grid1D::centered(0.0, 0.1, n)));
  EXPECT_NEAR(w.integral(), 1.0, 1e-6);
  for (std::size_t iq : {100u, 128u, 140u})
    for (std::size_t ip : {120u, 128u, 131u}) {
      const double q = w.q.point(iq), p = w.p.point(ip);
      EXPECT_NEAR(w.values(static_cast<Eigen::Index>(iq), static_cast<Eigen::Index>(ip)),
                  std::exp(-(q * q + p * p) / 2.0) / (2.0 * kPi), 1e-10);
    }
}

TEST(Wigner, GridAgreesWithPointwise) {
  const Wavefunction psi = as_wavefunction({-1.0, 1.0, 0.5, kPi});
  const auto w = wigner_grid(sample(psi, Grid1D::centered(0.0, 0.1, 256)));
  for (std::size_t iq : {110u, 118u})
    for (std::size_t ip : {130u, 140u})
      EXPECT_NEAR(w.values(static_cast<Eigen::Index>(iq), static_cast<Eigen::Index>(ip)),
                  wigner_function(psi, w.q.point(iq), w.p.point(ip)), 1e-9);
}

TEST(Wigner, ClusterMarginalIsOutcomeDistribution) {
  const SqueezedCoherent s{-1.0, 1.0, 0.5, kPi};
  const SqueezedVacuum vac{0.5};
  const auto w = wigner_grid(sample(as_wavefunction(s), Grid1D::centered(0.0, 0.1, 256)));
  const auto cw = cluster_wigner(w, vac);
  EXPECT_NEAR(cw.integral(), 1.0, 1e-6);
  const Eigen::VectorXd marginal = cw.momentum_marginal();
  for (Eigen::Index i = 100; i < 160; i += 7)
    EXPECT_NEAR(marginal(i), outcome_distribution(s, vac, cw.p1.point(static_cast<std::size_t>(i))), 1e-4);
  const double pointwise = cluster_wigner_function(as_wavefunction(s), vac, cw.q1.point(130), cw.p1.point(120));
  EXPECT_NEAR(cw.values(120, 130), pointwise, 1e-6);
}

TEST(HeatResidual, SecondOrderConvergence) {
  for (const Density& rho : {gaussian_density(0.3, 0.8), as_density({0.5, 0.2, 0.4, 1.0})}) {
    const double coarse = heat_residual(rho, 0.4, 1.0, 0.1);
    const double fine = heat_residual(rho, 0.4, 1.0, 0.05);
    EXPECT_GE(coarse / fine, 3.5);
    EXPECT_LE(coarse / fine, 4.5);
  }
  EXPECT_THROW(heat_residual(gaussian_density(0, 1), 0.0, 0.05, 0.1), DomainError);
}

TEST(HeatResidual, SmallerTimeIsSharper) {
  const Density rho = gaussian_density(0.0, 0.2);
  const double wide = detail::outcome_distribution(rho, 2.0 * 1.0, 0.0, {});
  const double sharp = detail::outcome_distribution(rho, 2.0 * 0.5, 0.0, {});
  EXPECT_GT(sharp, wide);
}
