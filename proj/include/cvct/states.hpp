#pragma once

// Input and ancilla states: the squeezed-coherent payload and the squeezed
// vacuum of each cluster, plus type-erased wavefunction/density carriers used
// by the quadrature paths.

#include <cmath>
#include <complex>
#include <functional>
#include <string>

#include "cvct/errors.hpp"
#include "cvct/gaussian_core.hpp"

namespace cvct {

using cplx = std::complex<double>;

inline constexpr double kMaxSqueezing = 5.0;

struct SqueezedVacuum {
  double r2 = 0.0;

  /// V_s^2 = e^(2 r2).
  double vs2() const { return std::exp(2.0 * r2); }
  double position_variance() const { return std::exp(-2.0 * r2); }
  double momentum_variance() const { return std::exp(2.0 * r2); }
};

struct SqueezedCoherent {
  double q0 = 0.0;
  double p0 = 0.0;
  double r1 = 0.0;
  double theta = 0.0;
};

inline void validate(const SqueezedVacuum& v) {
  if (!std::isfinite(v.r2) || std::abs(v.r2) > kMaxSqueezing)
    throw DomainError("squeezed vacuum: |r2| must not exceed " + std::to_string(kMaxSqueezing));
}

inline void validate(const SqueezedCoherent& s) {
  if (!std::isfinite(s.q0) || !std::isfinite(s.p0))
    throw DomainError("squeezed-coherent state: q0 and p0 must be finite");
  if (!std::isfinite(s.r1) || std::abs(s.r1) > kMaxSqueezing)
    throw DomainError("squeezed-coherent state: |r1| must not exceed " + std::to_string(kMaxSqueezing));
  constexpr double slack = 1e-9;
  if (!(s.theta >= -slack && s.theta <= 2.0 * kPi + slack))
    throw DomainError("squeezed-coherent state: theta must lie in [0, 2 pi]");
}

inline double position_variance(const SqueezedCoherent& s) {
  return std::cosh(2.0 * s.r1) - std::cos(s.theta) * std::sinh(2.0 * s.r1);
}

inline double momentum_variance(const SqueezedCoherent& s) {
  return std::cosh(2.0 * s.r1) + std::cos(s.theta) * std::sinh(2.0 * s.r1);
}

/// Position-space wavefunction of the squeezed-coherent state, prefactor evaluated as written
/// (principal square roots, no simplification of the modulus factors).
inline cplx squeezed_coherent_wavefunction(const SqueezedCoherent& s, double q) {
  const double c = std::cosh(s.r1);
  const double sh = std::sinh(s.r1);
  const cplx e_plus = std::polar(1.0, s.theta);
  const cplx e_minus = std::polar(1.0, -s.theta);
  const cplx minus_conj = c - e_minus * sh;
  const cplx minus = c - e_plus * sh;
  const cplx prefactor = std::pow(2.0 * kPi, -0.25) * std::sqrt(minus_conj) /
                         (std::sqrt(std::abs(minus)) * std::sqrt(std::abs(minus_conj)));
  const cplx phase = std::exp(cplx(0.0, 0.5 * s.p0 * (q - s.q0 / 2.0)));
  const cplx z = (c + e_plus * sh) / minus;
  const double x = q - s.q0;
  return prefactor * phase * std::exp(-0.25 * z * x * x);
}

/// Closed-form |psi(q - p1)|^2: a normal density with mean X0 = q0 + p1 and variance delta_q^2.
inline double displaced_position_density(const SqueezedCoherent& s, double p1, double q) {
  const double var = position_variance(s);
  const double x = q - (s.q0 + p1);
  return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * kPi * var);
}

/// A position density with location/scale hints that seed quadrature panels.
struct Density {
  std::function<double(double)> pdf;
  double mean = 0.0;
  double stddev = 1.0;

  double operator()(double q) const { return pdf(q); }
};

/// A position wavefunction with hints for both quadratures.
struct Wavefunction {
  std::function<cplx(double)> amplitude;
  double q_mean = 0.0;
  double q_std = 1.0;
  double p_mean = 0.0;
  double p_std = 1.0;

  cplx operator()(double q) const { return amplitude(q); }

  Density density() const {
    auto amp = amplitude;
    return {[amp](double q) { return std::norm(amp(q)); }, q_mean, q_std};
  }
};

inline Density gaussian_density(double mean, double variance) {
  if (!(variance > 0.0)) throw DomainError("gaussian_density: variance must be positive");
  const Gaussian1D g{-mean, variance, 0.0};
  return {[g](double q) { return g.density(q); }, mean, std::sqrt(variance)};
}

inline Wavefunction as_wavefunction(const SqueezedCoherent& s) {
  validate(s);
  return {[s](double q) { return squeezed_coherent_wavefunction(s, q); }, s.q0,
          std::sqrt(position_variance(s)), s.p0, std::sqrt(momentum_variance(s))};
}

/// |psi|^2 of the squeezed-coherent wavefunction, evaluated from the wavefunction itself.
inline Density as_density(const SqueezedCoherent& s) { return as_wavefunction(s).density(); }

}  // namespace cvct
