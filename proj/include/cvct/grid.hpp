#pragma once

// Uniformly sampled wavefunctions and their hbar = 2 Fourier transforms.
//
// With q_j = q_min + j dq and p_k = p_min + k dp, dq dp = 4 pi / N, the kernel
// (2 sqrt(pi))^-1 exp(-i q p / 2) becomes an ordinary DFT between a pre-phase
// and a post-phase, so the discrete transform is exactly unitary.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cvct/errors.hpp"
#include "cvct/states.hpp"

namespace cvct {

enum class Basis { position, momentum };

inline const char* to_string(Basis b) { return b == Basis::position ? "position" : "momentum"; }

struct Grid1D {
  double min = 0.0;
  double step = 1.0;
  std::size_t size = 0;

  double point(std::size_t i) const { return min + step * static_cast<double>(i); }
  double max() const { return point(size - 1); }
  double extent() const { return step * static_cast<double>(size); }

  /// Grid of n points (power of two) with the given spacing, centered on `center`.
  static Grid1D centered(double center, double step, std::size_t n) {
    if (n < 2 || (n & (n - 1)) != 0) throw UsageError("grid size must be a power of two");
    if (!(step > 0.0)) throw DomainError("grid spacing must be positive");
    return {center - step * static_cast<double>(n / 2), step, n};
  }
};

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Conjugate grid: same size, spacing 4 pi / (N step), first point at `origin`.
inline Grid1D reciprocal_grid(const Grid1D& g, double origin) {
  return {origin, 4.0 * kPi / (static_cast<double>(g.size) * g.step), g.size};
}

inline Grid1D centered_reciprocal_grid(const Grid1D& g, double center = 0.0) {
  const double step = 4.0 * kPi / (static_cast<double>(g.size) * g.step);
  return {center - step * static_cast<double>(g.size / 2), step, g.size};
}

struct GridWavefunction {
  Grid1D grid;
  std::vector<cplx> amplitudes;
  Basis basis = Basis::position;

  /// Trapezoid-rule squared norm.
  double norm_squared() const {
    if (amplitudes.empty()) return 0.0;
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    s -= 0.5 * (std::norm(amplitudes.front()) + std::norm(amplitudes.back()));
    return s * grid.step;
  }

  void normalize() {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) throw DegenerateOutcomeError("cannot normalize a vanishing grid state");
    const double k = 1.0 / std::sqrt(n2);
    for (auto& a : amplitudes) a *= k;
  }

  /// Fraction of the squared norm carried by the outer `fraction` of the grid on each side.
  double edge_mass(double fraction = 1.0 / 64.0) const {
    const std::size_t band = std::max<std::size_t>(1, static_cast<std::size_t>(fraction * grid.size));
    double edge = 0.0, total = 0.0;
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
      const double w = std::norm(amplitudes[i]);
      total += w;
      if (i < band || i + band >= amplitudes.size()) edge += w;
    }
    return total > 0.0 ? edge / total : 0.0;
  }
};

inline GridWavefunction sample(const std::function<cplx(double)>& psi, const Grid1D& g,
                               Basis basis = Basis::position) {
  GridWavefunction out{g, std::vector<cplx>(g.size), basis};
  for (std::size_t i = 0; i < g.size; ++i) out.amplitudes[i] = psi(g.point(i));
  return out;
}

inline GridWavefunction sample(const Wavefunction& psi, const Grid1D& g) {
  return sample(psi.amplitude, g, Basis::position);
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place batched complex DFT of `howmany` contiguous length-n transforms.
inline void fft_batch(cplx* data, std::size_t n, std::size_t howmany, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  const int len = static_cast<int>(n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_many_dft(1, &len, static_cast<int>(howmany), buf, nullptr, 1, len, buf,
                              nullptr, 1, len, sign, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw Error("FFTW could not create a transform plan");
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

inline void check_edges(const GridWavefunction& psi, double leak_tolerance, const char* what) {
  const double edge = psi.edge_mass();
  if (edge > leak_tolerance) {
    char buf[160];
    std::snprintf(buf, sizeof buf, ": %.3e of the norm sits at the grid edge (limit %.3e)", edge,
                  leak_tolerance);
    throw ResolutionError(std::string(what) + buf);
  }
}

/// Apply the hbar = 2 kernel to rows of length in.size along a contiguous axis.
/// sign = -1: position -> momentum; sign = +1: momentum -> position.
inline void transform_rows(cplx* data, std::size_t howmany, const Grid1D& in, const Grid1D& out,
                           int sign) {
  const std::size_t n = in.size;
  const double s = static_cast<double>(sign);
  std::vector<cplx> pre(n), post(n);
  for (std::size_t j = 0; j < n; ++j) {
    pre[j] = std::polar(1.0, s * static_cast<double>(j) * in.step * out.min / 2.0);
    post[j] = std::polar(in.step / (2.0 * std::sqrt(kPi)), s * in.min * out.point(j) / 2.0);
  }
  for (std::size_t r = 0; r < howmany; ++r)
    for (std::size_t j = 0; j < n; ++j) data[r * n + j] *= pre[j];
  fft_batch(data, n, howmany, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
  for (std::size_t r = 0; r < howmany; ++r)
    for (std::size_t j = 0; j < n; ++j) data[r * n + j] *= post[j];
}

}  // namespace detail

inline constexpr double kDefaultLeakTolerance = 1e-8;

/// Position amplitudes -> momentum amplitudes. The momentum grid starts at `momentum_min`
/// (centered on zero when omitted).
inline GridWavefunction fourier_transform(const GridWavefunction& psi,
                                          std::optional<double> momentum_min = std::nullopt,
                                          double leak_tolerance = kDefaultLeakTolerance) {
  if (psi.basis != Basis::position) throw UsageError("fourier_transform expects a position-basis grid");
  detail::check_edges(psi, leak_tolerance, "fourier_transform input");
  const Grid1D pg = momentum_min ? reciprocal_grid(psi.grid, *momentum_min)
                                 : centered_reciprocal_grid(psi.grid);
  GridWavefunction out{pg, psi.amplitudes, Basis::momentum};
  detail::transform_rows(out.amplitudes.data(), 1, psi.grid, pg, -1);
  detail::check_edges(out, leak_tolerance, "fourier_transform output");
  return out;
}

/// Momentum amplitudes -> position amplitudes.
inline GridWavefunction inverse_fourier_transform(const GridWavefunction& psi,
                                                  std::optional<double> position_min = std::nullopt,
                                                  double leak_tolerance = kDefaultLeakTolerance) {
  if (psi.basis != Basis::momentum)
    throw UsageError("inverse_fourier_transform expects a momentum-basis grid");
  detail::check_edges(psi, leak_tolerance, "inverse_fourier_transform input");
  const Grid1D qg = position_min ? reciprocal_grid(psi.grid, *position_min)
                                 : centered_reciprocal_grid(psi.grid);
  GridWavefunction out{qg, psi.amplitudes, Basis::position};
  detail::transform_rows(out.amplitudes.data(), 1, psi.grid, qg, +1);
  detail::check_edges(out, leak_tolerance, "inverse_fourier_transform output");
  return out;
}

/// Direct (non-FFT) evaluation of the momentum amplitude at arbitrary p.
inline cplx momentum_amplitude_at(const GridWavefunction& psi, double p) {
  if (psi.basis != Basis::position) throw UsageError("momentum_amplitude_at expects a position-basis grid");
  cplx acc = 0.0;
  for (std::size_t j = 0; j < psi.grid.size; ++j)
    acc += psi.amplitudes[j] * std::polar(1.0, -psi.grid.point(j) * p / 2.0);
  return acc * psi.grid.step / (2.0 * std::sqrt(kPi));
}

/// Two-mode amplitudes; mode 1 is the contiguous (fast) index: a[i2 * n1 + i1].
struct GridWavefunction2D {
  Grid1D axis1;
  Grid1D axis2;
  std::vector<cplx> amplitudes;
  Basis basis1 = Basis::position;
  Basis basis2 = Basis::position;

  cplx& at(std::size_t i1, std::size_t i2) { return amplitudes[i2 * axis1.size + i1]; }
  const cplx& at(std::size_t i1, std::size_t i2) const { return amplitudes[i2 * axis1.size + i1]; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s * axis1.step * axis2.step;
  }
};

/// psi1(q1) psi2(q2) on the given axes.
inline GridWavefunction2D product_state(const GridWavefunction& mode1, const GridWavefunction& mode2) {
  GridWavefunction2D out{mode1.grid, mode2.grid,
                         std::vector<cplx>(mode1.grid.size * mode2.grid.size), mode1.basis,
                         mode2.basis};
  for (std::size_t i2 = 0; i2 < mode2.grid.size; ++i2)
    for (std::size_t i1 = 0; i1 < mode1.grid.size; ++i1)
      out.at(i1, i2) = mode1.amplitudes[i1] * mode2.amplitudes[i2];
  return out;
}

/// Largest relative deviation of a two-mode grid from the outer product of its row/column
/// through the peak entry; zero for an exactly separable state.
inline double separability_defect(const GridWavefunction2D& psi) {
  std::size_t b1 = 0, b2 = 0;
  double best = -1.0;
  for (std::size_t i2 = 0; i2 < psi.axis2.size; ++i2)
    for (std::size_t i1 = 0; i1 < psi.axis1.size; ++i1)
      if (std::norm(psi.at(i1, i2)) > best) best = std::norm(psi.at(i1, i2)), b1 = i1, b2 = i2;
  const cplx pivot = psi.at(b1, b2);
  if (std::abs(pivot) == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t i2 = 0; i2 < psi.axis2.size; ++i2)
    for (std::size_t i1 = 0; i1 < psi.axis1.size; ++i1) {
      const cplx rank1 = psi.at(i1, b2) * psi.at(b1, i2) / pivot;
      worst = std::max(worst, std::abs(psi.at(i1, i2) - rank1) / std::abs(pivot));
    }
  return worst;
}

/// Transform mode 1 from position to momentum, the momentum axis starting at `momentum_min`.
inline void fourier_transform_mode1(GridWavefunction2D& psi, double momentum_min) {
  if (psi.basis1 != Basis::position) throw UsageError("mode 1 is not in the position basis");
  const Grid1D pg = reciprocal_grid(psi.axis1, momentum_min);
  detail::transform_rows(psi.amplitudes.data(), psi.axis2.size, psi.axis1, pg, -1);
  psi.axis1 = pg;
  psi.basis1 = Basis::momentum;
}

}  // namespace cvct
