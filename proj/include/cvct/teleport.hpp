#pragma once

// Single-cluster teleportation: the distorted output psi(q) f_G(q + p1), its
// fidelity with the input, and the window-averaged fidelity.

#include <cmath>
#include <string>

#include "cvct/errors.hpp"
#include "cvct/gaussian_core.hpp"
#include "cvct/grid.hpp"
#include "cvct/measurement.hpp"
#include "cvct/quadrature.hpp"
#include "cvct/states.hpp"

namespace cvct {

struct TeleportResult {
  double p1 = 0.0;
  double fidelity = 0.0;
  double probability_density = 0.0;
  double effective_displacement = 0.0;
};

inline constexpr double kDegenerateProbability = 1e-300;

inline double effective_displacement(double q0, double p1) { return q0 + p1; }

namespace detail {

/// int f_G(q) rho(q - p1) dq for an envelope of position variance env_var.
inline double overlap_integral(const Density& rho, double env_var, double p1, Tolerance tol) {
  const Gaussian1D env{0.0, env_var, 0.0};
  const auto pts = overlap_panels(2.0 * env_var, rho, p1);
  return integrate([&](double q) { return env.amplitude(q) * rho(q - p1); }, pts, tol).value;
}

inline double fidelity(const Density& rho, double env_var, double p1, Tolerance tol) {
  const double P = outcome_distribution(rho, env_var, p1, tol);
  if (!(P > kDegenerateProbability))
    throw DegenerateOutcomeError("fidelity: outcome p1 = " + std::to_string(p1) +
                                 " has vanishing probability density");
  const double a = overlap_integral(rho, env_var, p1, tol);
  return a * a / P;
}

/// Closed-form fidelity of a Gaussian input of position variance dq2 through an envelope of
/// position variance env_var, at effective displacement x0. Evaluated in the log domain.
inline double fidelity_closed(double dq2, double env_var, double x0) {
  const double v2 = 1.0 / env_var;
  const double sigma2 = v2 / (1.0 + v2 * dq2);
  const double delta2 = v2 / (2.0 + v2 * dq2);
  const double log_p = 0.5 * std::log(sigma2 / (2.0 * kPi)) - sigma2 * x0 * x0 / 2.0;
  const double log_num = 0.5 * std::log(2.0 / (kPi * v2)) + std::log(delta2) - delta2 * x0 * x0;
  return std::exp(log_num - log_p);
}

inline double average_fidelity(const Density& rho, double env_var, const SelectivityWindow& w,
                               Tolerance tol) {
  validate(w);
  const Spread sp = outcome_spread(rho, env_var);
  const Tolerance inner{tol.abs * 1e-2, tol.rel * 1e-2};
  auto g = [&](double p1) {
    const double a = overlap_integral(rho, env_var, p1, inner);
    return a * a;
  };
  double lo = std::max(w.lower(), sp.mean - kTailSigmas * sp.stddev);
  double hi = std::min(w.upper(), sp.mean + kTailSigmas * sp.stddev);
  if (!(lo < hi)) lo = w.lower(), hi = w.upper();
  const auto pts = panel_breakpoints(lo, hi, sp.stddev / 2.0, sp.mean, 200);
  return integrate(g, pts, tol).value;
}

}  // namespace detail

inline double fidelity(const Density& rho, const SqueezedVacuum& vac, double p1, Tolerance tol = {}) {
  validate(vac);
  return detail::fidelity(rho, vac.position_variance(), p1, tol);
}

inline double fidelity(const Wavefunction& psi, const SqueezedVacuum& vac, double p1,
                       Tolerance tol = {}) {
  return fidelity(psi.density(), vac, p1, tol);
}

inline double fidelity(const SqueezedCoherent& s, const SqueezedVacuum& vac, double p1,
                       Tolerance tol = {}) {
  return fidelity(as_density(s), vac, p1, tol);
}

inline double fidelity_closed(const SqueezedCoherent& s, const SqueezedVacuum& vac, double p1) {
  validate(s);
  validate(vac);
  return detail::fidelity_closed(position_variance(s), vac.position_variance(),
                                 effective_displacement(s.q0, p1));
}

inline TeleportResult teleport(const SqueezedCoherent& s, const SqueezedVacuum& vac, double p1) {
  return {p1, fidelity_closed(s, vac, p1), outcome_distribution_closed(s, vac, p1),
          effective_displacement(s.q0, p1)};
}

/// Window-averaged fidelity, un-normalized: int_window [int f_G(q) rho(q - p1) dq]^2 dp1.
inline double average_fidelity(const Density& rho, const SqueezedVacuum& vac,
                               const SelectivityWindow& w, Tolerance tol = {}) {
  validate(vac);
  return detail::average_fidelity(rho, vac.position_variance(), w, tol);
}

inline double average_fidelity(const SqueezedCoherent& s, const SqueezedVacuum& vac,
                               const SelectivityWindow& w, Tolerance tol = {}) {
  return average_fidelity(as_density(s), vac, w, tol);
}

/// Alternative reading of the window average: the un-normalized value divided by the
/// probability of landing in the window.
inline double average_fidelity_normalized(const Density& rho, const SqueezedVacuum& vac,
                                          const SelectivityWindow& w, Tolerance tol = {}) {
  return average_fidelity(rho, vac, w, tol) / teleport_probability(rho, vac, w, tol);
}

inline double average_fidelity_normalized(const SqueezedCoherent& s, const SqueezedVacuum& vac,
                                          const SelectivityWindow& w, Tolerance tol = {}) {
  return average_fidelity_normalized(as_density(s), vac, w, tol);
}

/// psi(q) f_G(q + p1), normalized; the squared normalization constant is P(p1).
inline Wavefunction post_measurement_wavefunction(const Wavefunction& psi, const SqueezedVacuum& vac,
                                                  double p1, Tolerance tol = {}) {
  validate(vac);
  const double v = vac.position_variance();
  const double P = detail::outcome_distribution(psi.density(), v, p1, tol);
  if (!(P > kDegenerateProbability))
    throw DegenerateOutcomeError("post_measurement_wavefunction: vanishing overlap at p1 = " +
                                 std::to_string(p1));
  const Gaussian1D env{p1, v, 0.0};
  const double k = 1.0 / std::sqrt(P);
  auto amp = psi.amplitude;
  // Hints: precision-weighted product of the input spread and the envelope.
  const double s2 = psi.q_std * psi.q_std;
  const double var = v * s2 / (v + s2);
  const double mean = (psi.q_mean * v - p1 * s2) / (v + s2);
  return {[amp, env, k](double q) { return amp(q) * env.amplitude(q) * k; }, mean, std::sqrt(var),
          psi.p_mean, std::sqrt(psi.p_std * psi.p_std + 1.0 / v)};
}

/// Momentum amplitudes of a sampled post-measurement state.
inline GridWavefunction momentum_wavefunction(const GridWavefunction& psi_prime) {
  return fourier_transform(psi_prime, std::nullopt, 1e-6);
}

}  // namespace cvct
