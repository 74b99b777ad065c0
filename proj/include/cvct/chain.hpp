#pragma once

// Sequential teleportation through a linear chain of two-mode clusters with
// intermediate corrections. Every completed stage multiplies the input density
// by its squared envelope f_G(q + p1)^2; the accumulated envelopes collapse to
// a single Gaussian, so the chain behaves like one cluster with that envelope.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "cvct/errors.hpp"
#include "cvct/gaussian_core.hpp"
#include "cvct/measurement.hpp"
#include "cvct/optimize.hpp"
#include "cvct/quadrature.hpp"
#include "cvct/states.hpp"
#include "cvct/teleport.hpp"

namespace cvct {

struct Stage {
  SqueezedVacuum vac;
  std::variant<double, SelectivityWindow> measurement = 0.0;

  bool has_outcome() const { return std::holds_alternative<double>(measurement); }
  double outcome() const {
    if (!has_outcome()) throw UsageError("stage has a window, not a fixed outcome");
    return std::get<double>(measurement);
  }
  const SelectivityWindow& window() const {
    if (has_outcome()) throw UsageError("stage has a fixed outcome, not a window");
    return std::get<SelectivityWindow>(measurement);
  }
};

struct ChainSpec {
  Density input;
  std::vector<Stage> stages;
};

struct CompositeEnvelope {
  Gaussian1D gaussian;
  double net_center = 0.0;
  double net_variance = 1.0;
  double scale_log = 0.0;
};

inline CompositeEnvelope composite_envelope(std::span<const Stage> stages) {
  if (stages.empty()) throw UsageError("composite_envelope: no stages");
  std::vector<GaussianInput> inputs;
  inputs.reserve(stages.size());
  for (const auto& st : stages) {
    validate(st.vac);
    inputs.push_back({st.vac.position_variance(), st.outcome()});
  }
  const auto prod = gaussian_product(inputs);
  return {prod.composite, prod.composite.center, prod.composite.variance, prod.scale_log};
}

inline CompositeEnvelope composite_envelope(const std::vector<Stage>& stages) {
  return composite_envelope(std::span<const Stage>(stages));
}

namespace detail {

inline std::span<const Stage> leading(const ChainSpec& spec, std::size_t n) {
  if (n > spec.stages.size()) throw UsageError("chain has fewer stages than requested");
  return std::span<const Stage>(spec.stages.data(), n);
}

/// rho(q) g(q) / Z for a Gaussian envelope g = N(q; -center, variance).
inline Density reweight(const Density& rho, double center, double variance, Tolerance tol) {
  const Gaussian1D env{center, variance, 0.0};
  const Gaussian1D centered{0.0, variance, 0.0};
  const auto pts = overlap_panels(variance, rho, center);
  const double z =
      integrate([&](double q) { return centered.density(q) * rho(q - center); }, pts, tol).value;
  if (!(z > kDegenerateProbability))
    throw DegenerateOutcomeError("chain: the accumulated envelope has no overlap with the input");
  const double s2 = rho.stddev * rho.stddev;
  const double mean = (rho.mean * variance - center * s2) / (variance + s2);
  const double var = variance * s2 / (variance + s2);
  auto pdf = rho.pdf;
  return {[pdf, env, z](double q) { return env.density(q) * pdf(q) / z; }, mean, std::sqrt(var)};
}

/// Sum of log f_G(i)^2(q + p_i) over stages, and the composite-free peak estimate used to
/// keep the exponentials in range.
struct LogEnvelopeProduct {
  std::vector<Gaussian1D> factors;
  double peak = 0.0;
  double width2 = 1.0;

  double operator()(double q) const {
    double s = 0.0;
    for (const auto& f : factors) s += f.log_density(q);
    return s;
  }
};

inline LogEnvelopeProduct log_envelope_product(std::span<const Stage> stages) {
  LogEnvelopeProduct out;
  double prec = 0.0, weighted = 0.0;
  for (const auto& st : stages) {
    validate(st.vac);
    const double v = st.vac.position_variance();
    out.factors.push_back({st.outcome(), v, 0.0});
    prec += 1.0 / v;
    weighted += -st.outcome() / v;
  }
  out.width2 = 1.0 / prec;
  out.peak = weighted * out.width2;
  return out;
}

}  // namespace detail

/// Position density entering stage `completed + 1`: rho times the squared envelopes of the
/// first `completed` stages, renormalized.
inline Density chain_modified_density(const ChainSpec& spec, std::size_t completed,
                                      Tolerance tol = {}) {
  if (completed == 0) return spec.input;
  const auto env = composite_envelope(detail::leading(spec, completed));
  return detail::reweight(spec.input, env.net_center, env.net_variance, tol);
}

inline double chain_density(const ChainSpec& spec, std::size_t completed, double q,
                            Tolerance tol = {}) {
  return chain_modified_density(spec, completed, tol)(q);
}

/// Same density built from the stage-by-stage product of envelopes, without the composite.
inline Density chain_modified_density_product_form(const ChainSpec& spec, std::size_t completed,
                                                   Tolerance tol = {}) {
  if (completed == 0) return spec.input;
  const auto logp = detail::log_envelope_product(detail::leading(spec, completed));
  const double offset = logp(logp.peak);
  const Density& rho = spec.input;
  auto unnorm = [logp, offset, pdf = rho.pdf](double q) { return std::exp(logp(q) - offset) * pdf(q); };

  const double s2 = rho.stddev * rho.stddev;
  const double var = logp.width2 * s2 / (logp.width2 + s2);
  const double mean = (rho.mean * logp.width2 + logp.peak * s2) / (logp.width2 + s2);
  const double sd = std::sqrt(var);
  const auto pts = panel_breakpoints(mean - detail::kTailSigmas * sd, mean + detail::kTailSigmas * sd,
                                     sd, mean, 200);
  const double z = integrate(unnorm, pts, tol).value;
  if (!(z > 0.0)) throw DegenerateOutcomeError("chain: vanishing normalization in product form");
  return {[unnorm, z](double q) { return unnorm(q) / z; }, mean, sd};
}

/// Probability that the last stage's outcome falls inside its window, given fixed outcomes
/// in all earlier stages.
inline double chain_probability(const ChainSpec& spec, Tolerance tol = {}) {
  if (spec.stages.empty()) throw UsageError("chain_probability: no stages");
  const Stage& last = spec.stages.back();
  validate(last.vac);
  const Density rho = chain_modified_density(spec, spec.stages.size() - 1, tol);
  return detail::teleport_probability(rho, last.vac.position_variance(), last.window(), tol);
}

/// Fidelity after all stages with fixed outcomes, computed as a single cluster whose envelope
/// is the composite of every stage.
inline double chain_fidelity(const ChainSpec& spec, Tolerance tol = {}) {
  const auto env = composite_envelope(spec.stages);
  return detail::fidelity(spec.input, env.net_variance, env.net_center, tol);
}

/// Fidelity from the raw stage products: [int prod f_i(q + p_i) rho]^2 / int prod f_i^2 rho.
inline double chain_fidelity_product_form(const ChainSpec& spec, Tolerance tol = {}) {
  if (spec.stages.empty()) throw UsageError("chain_fidelity_product_form: no stages");
  const auto logp = detail::log_envelope_product(spec.stages);
  const double offset = logp(logp.peak);
  const Density& rho = spec.input;

  auto panels = [&](double shape_var) {
    const double s2 = rho.stddev * rho.stddev;
    const double var = shape_var * s2 / (shape_var + s2);
    const double mean = (rho.mean * shape_var + logp.peak * s2) / (shape_var + s2);
    const double sd = std::sqrt(var);
    return panel_breakpoints(mean - detail::kTailSigmas * sd, mean + detail::kTailSigmas * sd, sd,
                             mean, 200);
  };
  const double num = integrate([&](double q) { return std::exp(0.5 * (logp(q) - offset)) * rho(q); },
                               panels(2.0 * logp.width2), tol).value;
  const double den =
      integrate([&](double q) { return std::exp(logp(q) - offset) * rho(q); }, panels(logp.width2), tol).value;
  if (!(den > 0.0)) throw DegenerateOutcomeError("chain: vanishing normalization in product form");
  return num * num / den;
}

/// Closed form for a squeezed-coherent input: the single-cluster expression with the
/// composite envelope variance and X0 = q0 + net center.
inline double chain_fidelity_closed(const SqueezedCoherent& s, std::span<const Stage> stages) {
  validate(s);
  const auto env = composite_envelope(stages);
  return detail::fidelity_closed(position_variance(s), env.net_variance,
                                 effective_displacement(s.q0, env.net_center));
}

/// Uniform chain: n - 1 completed stages with outcome `outcome` and a final stage whose
/// measurement is either a fixed outcome or a window.
inline ChainSpec uniform_chain(const Density& input, std::size_t n, double r2,
                               std::variant<double, SelectivityWindow> last, double outcome) {
  if (n < 1) throw UsageError("uniform_chain: need at least one cluster");
  ChainSpec spec{input, {}};
  for (std::size_t i = 0; i + 1 < n; ++i) spec.stages.push_back({{r2}, outcome});
  spec.stages.push_back({{r2}, last});
  return spec;
}

/// Center of the last stage's window that maximizes chain_probability at the given width.
inline double optimize_chain_center(const ChainSpec& spec, double width,
                                    double center_tolerance = 1e-6) {
  if (spec.stages.empty()) throw UsageError("optimize_chain_center: no stages");
  const Stage& last = spec.stages.back();
  validate(last.vac);
  const Density rho = chain_modified_density(spec, spec.stages.size() - 1, kSearchTolerance);
  return detail::optimize_window_center(rho, last.vac.position_variance(), width, kSearchTolerance,
                                        center_tolerance);
}

/// Rotation angle in [0, 2 pi] maximizing the fidelity through n identical clusters with
/// r1 = r2 = r at effective displacement x0 (all outcomes equal to q0 = x0 / 2).
inline double optimize_theta(std::size_t n, double r, double x0 = 0.0, double tolerance = 1e-6) {
  if (n < 1) throw UsageError("optimize_theta: need at least one cluster");
  const double q0 = x0 / 2.0;
  auto objective = [&](double theta) {
    const SqueezedCoherent s{q0, 0.0, r, theta};
    return chain_fidelity(uniform_chain(as_density(s), n, r, q0, q0), kSearchTolerance);
  };
  MaximizeOptions opt;
  opt.tolerance = tolerance;
  return maximize_scalar(objective, 0.0, 2.0 * kPi, opt).argmax;
}

/// Diagnostic Monte Carlo run: every windowed stage draws its outcome from P(p1) restricted
/// to the window (inverse CDF on a tabulated grid), fixed outcomes are kept.
inline std::vector<double> sample_chain_outcomes(const ChainSpec& spec, std::uint64_t seed,
                                                 std::size_t table_points = 257) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  ChainSpec running{spec.input, {}};
  std::vector<double> outcomes;
  for (const auto& st : spec.stages) {
    double p = 0.0;
    if (st.has_outcome()) {
      p = st.outcome();
    } else {
      const Density rho = chain_modified_density(running, running.stages.size());
      const auto& w = st.window();
      std::vector<double> xs(table_points), cdf(table_points, 0.0);
      double prev = 0.0;
      for (std::size_t i = 0; i < table_points; ++i) {
        xs[i] = w.lower() + w.width * static_cast<double>(i) / static_cast<double>(table_points - 1);
        const double v = detail::outcome_distribution(rho, st.vac.position_variance(), xs[i], {});
        if (i > 0) cdf[i] = cdf[i - 1] + 0.5 * (v + prev) * (xs[i] - xs[i - 1]);
        prev = v;
      }
      if (!(cdf.back() > 0.0)) throw DegenerateOutcomeError("sample_chain_outcomes: empty window");
      const double u = uniform(rng) * cdf.back();
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), 1,
                                                     table_points - 1);
      const double span = cdf[k] - cdf[k - 1];
      const double frac = span > 0.0 ? (u - cdf[k - 1]) / span : 0.5;
      p = xs[k - 1] + frac * (xs[k] - xs[k - 1]);
    }
    outcomes.push_back(p);
    running.stages.push_back({st.vac, p});
  }
  return outcomes;
}

}  // namespace cvct
