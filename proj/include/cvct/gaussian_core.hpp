#pragma once

// Gaussian building blocks in hbar = 2 units: the squeezed-vacuum envelope,
// the heat kernel, and products of squared Gaussians.
//
// Convention: a Gaussian with center c is the function f(q + c), so as a
// probability density its mean sits at -c.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "cvct/errors.hpp"

namespace cvct {

inline constexpr double kPi = std::numbers::pi;

/// exp(log_weight) * N(q; -center, variance).
struct Gaussian1D {
  double center = 0.0;
  double variance = 1.0;
  double log_weight = 0.0;

  double mean() const { return -center; }

  /// Value of the (weighted) probability density at q.
  double density(double q) const {
    const double x = q + center;
    return std::exp(log_weight - 0.5 * std::log(2.0 * kPi * variance) - x * x / (2.0 * variance));
  }

  double log_density(double q) const {
    const double x = q + center;
    return log_weight - 0.5 * std::log(2.0 * kPi * variance) - x * x / (2.0 * variance);
  }

  /// Square root of the density: the real wavefunction whose square is density().
  double amplitude(double q) const { return std::exp(0.5 * log_density(q)); }
};

struct GaussianInput {
  double variance = 1.0;
  double center = 0.0;
};

struct GaussianProductResult {
  Gaussian1D composite;
  double scale_log = 0.0;
};

/// (V_s^2 / 2 pi)^(1/4) exp(-V_s^2 q^2 / 4) with V_s^2 = e^(2 r2).
inline double squeezed_vacuum_wavefunction(double r2, double q) {
  const double v2 = std::exp(2.0 * r2);
  return std::pow(v2 / (2.0 * kPi), 0.25) * std::exp(-v2 * q * q / 4.0);
}

/// (4 pi t)^(-1/2) exp(-q^2 / 4t).
inline double heat_kernel(double t, double q) {
  if (!(t > 0.0)) throw DomainError("heat_kernel: t must be positive");
  return std::exp(-q * q / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
}

/// Product of the squared Gaussians N(q; -c_i, v_i) written as
/// exp(scale_log) * N(q; -P, v) with 1/v = sum 1/v_i and P the precision-weighted center.
inline GaussianProductResult gaussian_product(std::span<const GaussianInput> inputs) {
  if (inputs.empty()) throw UsageError("gaussian_product: empty input list");
  for (const auto& in : inputs)
    if (!(in.variance > 0.0)) throw DomainError("gaussian_product: variance must be positive");

  if (inputs.size() == 1) return {{inputs[0].center, inputs[0].variance, 0.0}, 0.0};

  double precision = 0.0, weighted = 0.0, sum_log_var = 0.0;
  for (const auto& in : inputs) {
    precision += 1.0 / in.variance;
    weighted += in.center / in.variance;
    sum_log_var += std::log(in.variance);
  }
  const double var = 1.0 / precision;
  const double center = weighted * var;

  // Scatter about the composite center instead of the difference of large sums in the printed form.
  double scatter = 0.0;
  for (const auto& in : inputs) {
    const double d = in.center - center;
    scatter += d * d / in.variance;
  }
  const double n = static_cast<double>(inputs.size());
  const double scale_log =
      -0.5 * (n - 1.0) * std::log(2.0 * kPi) + 0.5 * (std::log(var) - sum_log_var) - 0.5 * scatter;
  return {{center, var, 0.0}, scale_log};
}

inline GaussianProductResult gaussian_product(const std::vector<GaussianInput>& inputs) {
  return gaussian_product(std::span<const GaussianInput>(inputs));
}

/// N identical envelopes of variance e^(-2 r2), all centered at q0.
inline GaussianInput uniform_chain_params(int n, double r2, double q0) {
  if (n < 1) throw UsageError("uniform_chain_params: need at least one cluster");
  return {1.0 / (static_cast<double>(n) * std::exp(2.0 * r2)), q0};
}

}  // namespace cvct
