#pragma once

// Reference computations for the tests. None of these call the library's quadrature or
// closed forms: dense trapezoid sums (exponentially accurate for smooth decaying
// integrands), Gaussian algebra done pairwise, and textbook convolution identities.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;
using cplx = std::complex<double>;

template <class F>
auto trapezoid(F&& f, double lo, double hi, std::size_t n = 40001) {
  const double h = (hi - lo) / static_cast<double>(n - 1);
  decltype(f(lo)) s = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i + 1 < n; ++i) s += f(lo + h * static_cast<double>(i));
  return s * h;
}

inline double normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * pi * var);
}

inline double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -d * d / (2.0 * var) - 0.5 * std::log(2.0 * pi * var);
}

/// Position variance of the squeezed-coherent state from the covariance of a rotated
/// squeezer: diag(e^{-2r}, e^{2r}) rotated by theta / 2.
inline double rotated_position_variance(double r, double theta) {
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  return std::exp(-2.0 * r) * c * c + std::exp(2.0 * r) * s * s;
}

/// Product of two weighted normals N(q; m_a, v_a) N(q; m_b, v_b) = w N(q; m, v).
struct Weighted {
  double log_w, mean, var;
};

inline Weighted multiply(const Weighted& a, const Weighted& b) {
  const double var = a.var * b.var / (a.var + b.var);
  const double mean = (a.mean * b.var + b.mean * a.var) / (a.var + b.var);
  return {a.log_w + b.log_w + log_normal_pdf(a.mean, b.mean, a.var + b.var), mean, var};
}

/// Left fold of pairwise products over (mean, var) factors.
inline Weighted pairwise_fold(const std::vector<std::pair<double, double>>& factors) {
  Weighted acc{0.0, factors[0].first, factors[0].second};
  for (std::size_t i = 1; i < factors.size(); ++i) acc = multiply(acc, {0.0, factors[i].first, factors[i].second});
  return acc;
}

/// Outcome density for a Gaussian input of mean m and variance dq2 through an envelope of
/// variance v: a convolution of two normals, N(p1; -m, v + dq2).
inline double gaussian_outcome_density(double p1, double m, double dq2, double v) {
  return normal_pdf(p1, -m, v + dq2);
}

/// |<psi| psi_out>|^2 where psi_out ~ psi(q) f_G(q + p1) after undoing the displacement, by a
/// dense trapezoid sum over complex amplitudes.
inline double overlap_fidelity(const std::function<cplx(double)>& psi, double env_var, double p1,
                               double lo, double hi) {
  auto f = [&](double q) { return std::pow(normal_pdf(q, 0.0, env_var), 0.5); };
  const cplx num = trapezoid([&](double q) { return std::conj(psi(q - p1)) * psi(q - p1) * f(q); }, lo, hi);
  const double den = trapezoid([&](double q) { return std::norm(psi(q - p1)) * f(q) * f(q); }, lo, hi);
  const double nrm = trapezoid([&](double q) { return std::norm(psi(q)); }, lo, hi);
  return std::norm(num) / (den * nrm);
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

}  // namespace oracle
