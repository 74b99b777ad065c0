#pragma once

// Displacement, Fourier and controlled-phase gates, both as Heisenberg-picture
// affine maps on (q1, p1, q2, p2, ...) and as actions on grid wavefunctions.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>

#include "cvct/errors.hpp"
#include "cvct/grid.hpp"

namespace cvct {

/// x -> S x + d for the quadrature vector x = (q1, p1, ..., qM, pM).
template <int Modes>
struct QuadratureMap {
  using Matrix = Eigen::Matrix<double, 2 * Modes, 2 * Modes>;
  using Vector = Eigen::Matrix<double, 2 * Modes, 1>;

  Matrix S = Matrix::Identity();
  Vector d = Vector::Zero();

  Vector apply(const Vector& x) const { return S * x + d; }

  /// Map of "this gate, then `next`" (Schrodinger order).
  QuadratureMap then(const QuadratureMap& next) const {
    return {next.S * S, next.S * d + next.d};
  }

  QuadratureMap inverse() const {
    const Matrix inv = S.inverse();
    return {inv, -inv * d};
  }

  static Matrix symplectic_form() {
    Matrix omega = Matrix::Zero();
    for (int m = 0; m < Modes; ++m) {
      omega(2 * m, 2 * m + 1) = 1.0;
      omega(2 * m + 1, 2 * m) = -1.0;
    }
    return omega;
  }

  /// Largest entry of S Omega S^T - Omega.
  double symplectic_defect() const {
    const Matrix omega = symplectic_form();
    return (S * omega * S.transpose() - omega).cwiseAbs().maxCoeff();
  }

  bool is_symplectic(double tol = 1e-12) const { return symplectic_defect() <= tol; }

  double distance(const QuadratureMap& o) const {
    return std::max((S - o.S).cwiseAbs().maxCoeff(), (d - o.d).cwiseAbs().maxCoeff());
  }
};

using SingleModeMap = QuadratureMap<1>;
using TwoModeMap = QuadratureMap<2>;

/// q -> q + r.
inline SingleModeMap x_gate_map(double r) {
  SingleModeMap m;
  m.d(0) = r;
  return m;
}

/// p -> p + s.
inline SingleModeMap z_gate_map(double s) {
  SingleModeMap m;
  m.d(1) = s;
  return m;
}

/// q -> -p, p -> q.
inline SingleModeMap fourier_map() {
  SingleModeMap m;
  m.S << 0.0, -1.0, 1.0, 0.0;
  return m;
}

/// Controlled phase: p_c -> p_c + q_t, p_t -> p_t + q_c, positions unchanged.
inline TwoModeMap cz_map() {
  TwoModeMap m;
  m.S(1, 2) = 1.0;
  m.S(3, 0) = 1.0;
  return m;
}

/// Embed a single-mode map acting on `mode` (0 or 1) into the two-mode space.
inline TwoModeMap on_mode(const SingleModeMap& g, int mode) {
  TwoModeMap m;
  const int o = 2 * mode;
  m.S.block<2, 2>(o, o) = g.S;
  m.d.segment<2>(o) = g.d;
  return m;
}

// Grid actions.

/// psi(q) -> psi(q - r), applied as the phase exp(-i r p / 2) in momentum space.
inline GridWavefunction apply_x(const GridWavefunction& psi, double r,
                                double leak_tolerance = kDefaultLeakTolerance) {
  GridWavefunction m = fourier_transform(psi, std::nullopt, leak_tolerance);
  for (std::size_t k = 0; k < m.grid.size; ++k)
    m.amplitudes[k] *= std::polar(1.0, -r * m.grid.point(k) / 2.0);
  return inverse_fourier_transform(m, psi.grid.min, leak_tolerance);
}

/// psi(q) -> exp(i s q / 2) psi(q).
inline GridWavefunction apply_z(const GridWavefunction& psi, double s) {
  if (psi.basis != Basis::position) throw UsageError("apply_z expects a position-basis grid");
  GridWavefunction out = psi;
  for (std::size_t j = 0; j < out.grid.size; ++j)
    out.amplitudes[j] *= std::polar(1.0, s * out.grid.point(j) / 2.0);
  return out;
}

/// (F psi)(x) = psi~(-x): the momentum amplitudes read on the mirrored axis.
inline GridWavefunction apply_fourier(const GridWavefunction& psi,
                                      double leak_tolerance = kDefaultLeakTolerance) {
  GridWavefunction m = fourier_transform(psi, std::nullopt, leak_tolerance);
  const std::size_t n = m.grid.size;
  GridWavefunction out{{-m.grid.max(), m.grid.step, n}, std::vector<cplx>(n), Basis::position};
  for (std::size_t j = 0; j < n; ++j) out.amplitudes[j] = m.amplitudes[n - 1 - j];
  return out;
}

/// (F^dagger psi)(x) = psi~(x).
inline GridWavefunction apply_fourier_dagger(const GridWavefunction& psi,
                                             double leak_tolerance = kDefaultLeakTolerance) {
  GridWavefunction m = fourier_transform(psi, std::nullopt, leak_tolerance);
  m.basis = Basis::position;
  return m;
}

/// Multiply the two-mode position amplitudes by exp(i q1 q2 / 2).
inline GridWavefunction2D cz_apply(GridWavefunction2D psi) {
  if (psi.basis1 != Basis::position || psi.basis2 != Basis::position)
    throw UsageError("cz_apply expects both modes in the position basis");
  for (std::size_t i2 = 0; i2 < psi.axis2.size; ++i2) {
    const double q2 = psi.axis2.point(i2);
    for (std::size_t i1 = 0; i1 < psi.axis1.size; ++i1)
      psi.at(i1, i2) *= std::polar(1.0, psi.axis1.point(i1) * q2 / 2.0);
  }
  return psi;
}

/// First moments <q>, <p> of a position-basis grid state (momentum via the transform).
struct Moments {
  double q_mean = 0.0, q_var = 0.0, p_mean = 0.0, p_var = 0.0;
};

inline Moments grid_moments(const GridWavefunction& psi) {
  if (psi.basis != Basis::position) throw UsageError("grid_moments expects a position-basis grid");
  auto moments = [](const GridWavefunction& g, double& mean, double& var) {
    double n = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < g.grid.size; ++j) {
      const double w = std::norm(g.amplitudes[j]);
      const double x = g.grid.point(j);
      n += w, m1 += w * x, m2 += w * x * x;
    }
    mean = m1 / n;
    var = m2 / n - mean * mean;
  };
  Moments out;
  moments(psi, out.q_mean, out.q_var);
  moments(fourier_transform(psi, std::nullopt, 1.0), out.p_mean, out.p_var);
  return out;
}

}  // namespace cvct
