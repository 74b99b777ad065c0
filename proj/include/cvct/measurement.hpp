#pragma once

// Windowed momentum measurement on mode 1 of the cluster: the outcome
// distribution P(p1) = int f_G(q)^2 rho(q - p1) dq, the probability of landing
// inside the selectivity window, and the placement of that window.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cvct/errors.hpp"
#include "cvct/gaussian_core.hpp"
#include "cvct/grid.hpp"
#include "cvct/optimize.hpp"
#include "cvct/quadrature.hpp"
#include "cvct/states.hpp"

namespace cvct {

struct SelectivityWindow {
  double center = 0.0;
  double width = 1.0;

  double lower() const { return center - width / 2.0; }
  double upper() const { return center + width / 2.0; }
  bool contains(double p) const { return p >= lower() && p <= upper(); }
};

inline void validate(const SelectivityWindow& w) {
  if (!std::isfinite(w.center)) throw DomainError("selectivity window: center must be finite");
  if (!(w.width > 0.0) || !std::isfinite(w.width))
    throw DomainError("selectivity window: width must be positive and finite");
}

namespace detail {

inline constexpr double kTailSigmas = 12.0;

/// Panels for int g(q) rho(q - shift) dq where g is a centered Gaussian shape of variance
/// `shape_var` and rho has the hinted mean/std.
inline std::vector<double> overlap_panels(double shape_var, const Density& rho, double shift) {
  const double s_g = std::sqrt(shape_var);
  const double m_r = rho.mean + shift;
  const double s_r = rho.stddev;
  // Peak and width of the product of the two Gaussian shapes.
  const double var_star = shape_var * s_r * s_r / (shape_var + s_r * s_r);
  const double m_star = m_r * shape_var / (shape_var + s_r * s_r);
  const double s_star = std::sqrt(var_star);

  double lo = m_star - kTailSigmas * s_star;
  double hi = m_star + kTailSigmas * s_star;
  const double ilo = std::max(-kTailSigmas * s_g, m_r - kTailSigmas * s_r);
  const double ihi = std::min(kTailSigmas * s_g, m_r + kTailSigmas * s_r);
  if (ilo < ihi) {
    lo = std::min(lo, ilo);
    hi = std::max(hi, ihi);
  }
  return panel_breakpoints(lo, hi, s_star, m_star, 200);
}

/// P(p1) for an envelope of position variance `env_var` (f_G^2 = N(0, env_var)).
inline double outcome_distribution(const Density& rho, double env_var, double p1, Tolerance tol) {
  const Gaussian1D env{0.0, env_var, 0.0};
  const auto pts = overlap_panels(env_var, rho, p1);
  return integrate([&](double q) { return env.density(q) * rho(q - p1); }, pts, tol).value;
}

/// Location and spread of P(p1) implied by the hints: P ~ N(-mean, env_var + std^2).
struct Spread {
  double mean;
  double stddev;
};

inline Spread outcome_spread(const Density& rho, double env_var) {
  return {-rho.mean, std::sqrt(env_var + rho.stddev * rho.stddev)};
}

inline double teleport_probability(const Density& rho, double env_var, const SelectivityWindow& w,
                                   Tolerance tol) {
  validate(w);
  const Spread sp = outcome_spread(rho, env_var);
  const Tolerance inner{tol.abs * 1e-2, tol.rel * 1e-2};
  auto P = [&](double p1) { return outcome_distribution(rho, env_var, p1, inner); };

  double lo = std::max(w.lower(), sp.mean - kTailSigmas * sp.stddev);
  double hi = std::min(w.upper(), sp.mean + kTailSigmas * sp.stddev);
  if (!(lo < hi)) lo = w.lower(), hi = w.upper();
  const auto pts = panel_breakpoints(lo, hi, sp.stddev / 2.0, sp.mean, 200);
  return integrate(P, pts, tol).value;
}

inline double optimize_window_center(const Density& rho, double env_var, double width,
                                     Tolerance tol, double center_tolerance) {
  if (!(width > 0.0)) throw DomainError("optimize_window_center: width must be positive");
  const Spread sp = outcome_spread(rho, env_var);
  MaximizeOptions opt;
  opt.tolerance = center_tolerance;
  auto objective = [&](double c) { return teleport_probability(rho, env_var, {c, width}, tol); };
  return maximize_scalar(objective, sp.mean - 6.0 * sp.stddev, sp.mean + 6.0 * sp.stddev, opt).argmax;
}

}  // namespace detail

/// Tolerances used inside objective functions of searches: tight enough that quadrature noise
/// does not move the located extremum.
inline constexpr Tolerance kSearchTolerance{1e-13, 1e-11};

inline double outcome_distribution(const Density& rho, const SqueezedVacuum& vac, double p1,
                                   Tolerance tol = {}) {
  validate(vac);
  return detail::outcome_distribution(rho, vac.position_variance(), p1, tol);
}

inline double outcome_distribution(const SqueezedCoherent& s, const SqueezedVacuum& vac, double p1,
                                   Tolerance tol = {}) {
  return outcome_distribution(as_density(s), vac, p1, tol);
}

/// sigma^2 = V_s^2 / (1 + V_s^2 delta_q^2).
inline double outcome_sigma2(const SqueezedCoherent& s, const SqueezedVacuum& vac) {
  const double v2 = vac.vs2();
  return v2 / (1.0 + v2 * position_variance(s));
}

inline double outcome_distribution_closed(const SqueezedCoherent& s, const SqueezedVacuum& vac,
                                          double p1) {
  validate(s);
  validate(vac);
  const double sigma2 = outcome_sigma2(s, vac);
  const double x0 = s.q0 + p1;
  return std::sqrt(sigma2 / (2.0 * kPi)) * std::exp(-sigma2 * x0 * x0 / 2.0);
}

inline double teleport_probability(const Density& rho, const SqueezedVacuum& vac,
                                   const SelectivityWindow& w, Tolerance tol = {}) {
  validate(vac);
  return detail::teleport_probability(rho, vac.position_variance(), w, tol);
}

inline double teleport_probability(const SqueezedCoherent& s, const SqueezedVacuum& vac,
                                   const SelectivityWindow& w, Tolerance tol = {}) {
  return teleport_probability(as_density(s), vac, w, tol);
}

/// Window of the given width centered on p1 = -q0.
inline double teleport_probability_closed(const SqueezedCoherent& s, const SqueezedVacuum& vac,
                                          double width) {
  validate(s);
  validate(vac);
  if (!(width > 0.0)) throw DomainError("teleport_probability_closed: width must be positive");
  return std::erf(width * std::sqrt(outcome_sigma2(s, vac)) / (2.0 * std::sqrt(2.0)));
}

inline double optimize_window_center(const Density& rho, const SqueezedVacuum& vac, double width,
                                     double center_tolerance = 1e-6) {
  validate(vac);
  return detail::optimize_window_center(rho, vac.position_variance(), width, kSearchTolerance,
                                        center_tolerance);
}

inline double optimize_window_center(const SqueezedCoherent& s, const SqueezedVacuum& vac,
                                     double width, double center_tolerance = 1e-6) {
  return optimize_window_center(as_density(s), vac, width, center_tolerance);
}

/// Zero every momentum amplitude outside the window.
inline GridWavefunction window_project(const GridWavefunction& psi, const SelectivityWindow& w) {
  if (psi.basis != Basis::momentum) throw UsageError("window_project expects a momentum-basis grid");
  validate(w);
  if (w.upper() < psi.grid.min || w.lower() > psi.grid.max())
    throw DomainError("window_project: window lies outside the grid");
  GridWavefunction out = psi;
  for (std::size_t k = 0; k < out.grid.size; ++k)
    if (!w.contains(out.grid.point(k))) out.amplitudes[k] = 0.0;
  return out;
}

/// Relative variation (max - min) / max of P(p1) over the window, sampled at `samples` points.
/// Small values indicate the quasi-selective regime, where one outcome represents the window.
inline double quasi_selective_variation(const Density& rho, const SqueezedVacuum& vac,
                                        const SelectivityWindow& w, std::size_t samples = 33) {
  validate(w);
  double lo = INFINITY, hi = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double p = w.lower() + w.width * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double v = outcome_distribution(rho, vac, p);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi > 0.0 ? (hi - lo) / hi : 0.0;
}

}  // namespace cvct
