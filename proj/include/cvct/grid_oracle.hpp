#pragma once

// Brute-force reference for the analytic modules: the two-mode cluster is
// built on a grid, entangled with the controlled-phase gate, mode 1 is
// transformed to momentum and masked by the selectivity window, and the
// surviving mode-2 amplitudes are the conditional teleported states.
//
// The payload loaded into mode 1 is F^dagger psi, so that the mode-2 output
// for outcome p1 is f_G(q) psi(q - p1) and the analytic expressions, written
// in terms of rho = |psi|^2, apply unchanged.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvct/errors.hpp"
#include "cvct/gates.hpp"
#include "cvct/grid.hpp"
#include "cvct/measurement.hpp"
#include "cvct/quadrature.hpp"
#include "cvct/states.hpp"

namespace cvct {

struct OracleOptions {
  double max_momentum_step = 0.025;
  double tail_sigmas = 8.0;
  double points_per_sigma = 8.0;
  std::size_t min_mode1_points = 1024;
  std::size_t min_mode2_points = 1024;
  std::size_t slab_columns = 128;
  double leak_tolerance = kDefaultLeakTolerance;
};

/// Conditional mode-2 state for one outcome on the momentum grid.
struct OracleSlice {
  double p1 = 0.0;
  double density = 0.0;    // sum over q2 of |A(p1, q2)|^2 dq2, the outcome density
  GridWavefunction state;  // normalized f_G(q) psi(q - p1)
};

struct SingleClusterRun {
  double p_tel = 0.0;
  double momentum_step = 0.0;
  Grid1D mode1;
  Grid1D mode2;
  GridWavefunction input;  // the mode-1 payload F^dagger psi
  std::vector<OracleSlice> slices;
};

namespace detail {

struct OraclePlan {
  Grid1D payload;    // position grid sampling psi
  Grid1D mode1;      // position grid of mode 1 (carries F^dagger psi)
  Grid1D momentum1;  // momentum grid of mode 1 after the transform
  Grid1D mode2;
};

inline OraclePlan plan_oracle(const Wavefunction& psi, double env_var, const SelectivityWindow& w,
                              double p_step, const OracleOptions& opt) {
  const double T = opt.tail_sigmas;
  const double pps = opt.points_per_sigma;
  const double s_v = std::sqrt(env_var);
  const double dq = psi.q_std, dp = psi.p_std;

  // Mode 2: where f_G(q2) psi(q2 - p1) lives for p1 in the window.
  double lo = std::max(-T * s_v, psi.q_mean + w.lower() - T * dq);
  double hi = std::min(T * s_v, psi.q_mean + w.upper() + T * dq);
  if (!(lo < hi)) {
    const double var = env_var * dq * dq / (env_var + dq * dq);
    const double mid = (psi.q_mean + w.center) * env_var / (env_var + dq * dq);
    lo = mid - T * std::sqrt(var);
    hi = mid + T * std::sqrt(var);
  }
  // Room for the correcting shift by -p1 and a guard band outside the edge-mass check.
  const double shifted_lo = std::min(lo, lo - w.upper());
  const double shifted_hi = std::max(hi, hi - w.lower());
  const double pad = 0.1 * (shifted_hi - shifted_lo) + std::min(s_v, dq);
  const double lo2 = shifted_lo - pad, hi2 = shifted_hi + pad;
  const double max_p2 = std::abs(psi.p_mean) + T * (dp + 1.0 / s_v);
  const double step2 = std::min({s_v / pps, dq / pps, 2.0 * kPi / (2.0 * max_p2)});
  const std::size_t n2 =
      next_power_of_two(std::max(opt.min_mode2_points, static_cast<std::size_t>(std::ceil((hi2 - lo2) / step2))));
  const Grid1D mode2 = Grid1D::centered(0.5 * (lo2 + hi2), step2, n2);

  // Mode 1: resolve F^dagger psi (width dp) and cover the p1 support for every q2.
  const double p_lo = mode2.min - psi.q_mean - T * dq;
  const double p_hi = mode2.max() - psi.q_mean + T * dq;
  const double p_extent = 1.2 * (std::max(p_hi, w.upper()) - std::min(p_lo, w.lower()));
  const double q1_extent = 1.2 * 2.0 * (std::abs(psi.p_mean) + T * dp);
  std::size_t n1 = opt.min_mode1_points;
  n1 = std::max(n1, static_cast<std::size_t>(std::ceil(4.0 * kPi * pps / (dp * p_step))));
  n1 = std::max(n1, static_cast<std::size_t>(std::ceil(p_extent / p_step)));
  n1 = next_power_of_two(n1);
  const double step1 = 4.0 * kPi / (static_cast<double>(n1) * p_step);
  if (step1 * static_cast<double>(n1) < q1_extent)
    throw ResolutionError("oracle: momentum step too coarse to hold the payload on mode 1");
  const Grid1D mode1 = Grid1D::centered(psi.p_mean, step1, n1);

  // Momentum grid: cell centers at lower + (k + 1/2) p_step so the window edges are cell edges.
  const double p_center = 0.5 * (std::min(p_lo, w.lower()) + std::max(p_hi, w.upper()));
  const double first_center = w.lower() + 0.5 * p_step;
  const double shift = std::round((p_center - first_center) / p_step) - static_cast<double>(n1 / 2);
  const Grid1D momentum1{first_center + shift * p_step, p_step, n1};

  if (p_step > dq / pps * (1.0 + 1e-12))
    throw ResolutionError("oracle: momentum step does not resolve the payload width");
  // Payload spacing p_step makes its transform land on the mode-1 spacing.
  const Grid1D payload = Grid1D::centered(psi.q_mean, p_step, n1);
  return {payload, mode1, momentum1, mode2};
}

/// Sample psi on the payload grid and apply F^dagger, landing on the mode-1 grid.
inline GridWavefunction prepare_payload(const Wavefunction& psi, const OraclePlan& plan,
                                        double leak_tolerance) {
  const GridWavefunction sampled = sample(psi, plan.payload);
  GridWavefunction out = fourier_transform(sampled, plan.mode1.min, leak_tolerance);
  out.basis = Basis::position;
  return out;
}

inline double choose_momentum_step(const Wavefunction& psi, double width, const OracleOptions& opt) {
  const double limit = std::min(opt.max_momentum_step, psi.q_std / opt.points_per_sigma);
  return width / std::ceil(width / limit);
}

}  // namespace detail

/// Build the cluster for `psi`, measure mode 1 through the window, and return the
/// probability of a "yes" answer plus conditional mode-2 states at the grid outcomes
/// nearest to each requested p1.
inline SingleClusterRun run_single_cluster(const Wavefunction& psi, const SqueezedVacuum& vac,
                                           const SelectivityWindow& w,
                                           std::span<const double> sample_p1 = {},
                                           const OracleOptions& opt = {}) {
  validate(vac);
  validate(w);
  const double env_var = vac.position_variance();
  const double p_step = detail::choose_momentum_step(psi, w.width, opt);
  const auto plan = detail::plan_oracle(psi, env_var, w, p_step, opt);

  SingleClusterRun run;
  run.momentum_step = p_step;
  run.mode1 = plan.mode1;
  run.mode2 = plan.mode2;
  run.input = detail::prepare_payload(psi, plan, opt.leak_tolerance);

  const std::size_t n1 = plan.mode1.size, n2 = plan.mode2.size;
  std::vector<std::size_t> window_cells;
  for (std::size_t k = 0; k < n1; ++k)
    if (w.contains(plan.momentum1.point(k))) window_cells.push_back(k);
  if (window_cells.empty()) throw ResolutionError("oracle: no momentum cell inside the window");

  std::vector<std::size_t> slice_cells;
  for (double p : sample_p1) {
    const double k = std::round((p - plan.momentum1.min) / p_step);
    if (k < 0.0 || k >= static_cast<double>(n1)) throw DomainError("oracle: sampled p1 off the grid");
    slice_cells.push_back(static_cast<std::size_t>(k));
    run.slices.push_back({plan.momentum1.point(static_cast<std::size_t>(k)), 0.0,
                          {plan.mode2, std::vector<cplx>(n2), Basis::position}});
  }

  GridWavefunction vac_grid = sample([&](double q) { return cplx(squeezed_vacuum_wavefunction(vac.r2, q)); },
                                     plan.mode2);
  const std::size_t band1 = std::max<std::size_t>(1, n1 / 64);
  const std::size_t band2 = std::max<std::size_t>(1, n2 / 64);
  double in_window = 0.0, total = 0.0, edge_p = 0.0, edge_q2 = 0.0;

  for (std::size_t b = 0; b < n2; b += opt.slab_columns) {
    const std::size_t cols = std::min(opt.slab_columns, n2 - b);
    const Grid1D sub{plan.mode2.point(b), plan.mode2.step, cols};
    GridWavefunction mode2_part{sub,
                                std::vector<cplx>(vac_grid.amplitudes.begin() + static_cast<std::ptrdiff_t>(b),
                                                  vac_grid.amplitudes.begin() + static_cast<std::ptrdiff_t>(b + cols)),
                                Basis::position};
    GridWavefunction2D slab = product_state(run.input, mode2_part);
    if (b <= n2 / 2 && n2 / 2 < b + cols && separability_defect(slab) > 1e-12)
      throw Error("oracle: product input is not separable");
    slab = cz_apply(std::move(slab));
    fourier_transform_mode1(slab, plan.momentum1.min);

    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i2 = b + c;
      double col = 0.0, col_edge = 0.0;
      for (std::size_t k = 0; k < n1; ++k) {
        const double m = std::norm(slab.at(k, c));
        col += m;
        if (k < band1 || k + band1 >= n1) col_edge += m;
      }
      double win = 0.0;
      for (std::size_t k : window_cells) win += std::norm(slab.at(k, c));
      in_window += win;
      total += col;
      edge_p += col_edge;
      // Mass outside the window may reach the mode-2 edges without affecting the result.
      if (i2 < band2 || i2 + band2 >= n2) edge_q2 += win;
      for (std::size_t s = 0; s < slice_cells.size(); ++s)
        run.slices[s].state.amplitudes[i2] = slab.at(slice_cells[s], c);
    }
  }

  if (total > 0.0 && edge_p / total > opt.leak_tolerance)
    throw ResolutionError("oracle: " + std::to_string(edge_p / total) +
                          " of the two-mode norm sits at a momentum-grid edge");
  if (in_window > 0.0 && edge_q2 / in_window > opt.leak_tolerance)
    throw ResolutionError("oracle: " + std::to_string(edge_q2 / in_window) +
                          " of the in-window norm sits at a mode-2 grid edge");

  run.p_tel = in_window * p_step * plan.mode2.step;
  for (auto& sl : run.slices) {
    sl.density = sl.state.norm_squared();
    if (sl.density > 0.0) sl.state.normalize();
  }
  return run;
}

/// Teleportation fidelity for outcome p1 from the grid pipeline: the conditional mode-2
/// state is corrected with X^dagger(p1) and F^dagger and overlapped with the payload.
inline double oracle_fidelity(const Wavefunction& psi, const SqueezedVacuum& vac, double p1,
                              const OracleOptions& opt = {}) {
  const double p_step = std::min(opt.max_momentum_step, psi.q_std / opt.points_per_sigma);
  const double outcome[1] = {p1};
  const auto run = run_single_cluster(psi, vac, {p1, p_step}, outcome, opt);
  const OracleSlice& slice = run.slices.front();
  if (!(slice.density > 0.0)) throw DegenerateOutcomeError("oracle_fidelity: vanishing outcome density");

  const GridWavefunction shifted = apply_x(slice.state, -slice.p1, opt.leak_tolerance);

  // F^dagger evaluated directly at the mode-1 points where the payload is non-negligible.
  const GridWavefunction& in = run.input;
  double peak = 0.0;
  for (const auto& a : in.amplitudes) peak = std::max(peak, std::abs(a));
  cplx overlap = 0.0;
  for (std::size_t j = 0; j < in.grid.size; ++j) {
    if (std::abs(in.amplitudes[j]) < 1e-12 * peak) continue;
    overlap += std::conj(in.amplitudes[j]) * momentum_amplitude_at(shifted, in.grid.point(j));
  }
  overlap *= in.grid.step;
  return std::norm(overlap) / (in.norm_squared() * shifted.norm_squared());
}

/// W(q, p) = (4 pi)^-1 int du exp(-i p u / 2) psi(q + u/2) psi*(q - u/2), by quadrature.
inline double wigner_function(const Wavefunction& psi, double q, double p, Tolerance tol = {}) {
  const double reach = 2.0 * (detail::kTailSigmas * psi.q_std + std::abs(q - psi.q_mean));
  const double oscillation = std::abs(p) > 0.0 ? 2.0 * kPi / std::abs(p) : reach;
  const double spacing = std::min(psi.q_std, oscillation);
  const auto pts = panel_breakpoints(-reach, reach, spacing, 0.0, 400);
  auto integrand = [&](double u) {
    return std::real(std::polar(1.0, -p * u / 2.0) * psi(q + u / 2.0) * std::conj(psi(q - u / 2.0)));
  };
  return integrate(integrand, pts, tol).value / (4.0 * kPi);
}

/// Wigner function sampled on (position grid of psi) x (momentum grid of spacing 2 pi / (N dq)).
struct WignerGrid {
  Grid1D q;
  Grid1D p;
  Eigen::MatrixXd values;  // values(iq, ip)

  double integral() const { return values.sum() * q.step * p.step; }
};

inline WignerGrid wigner_grid(const GridWavefunction& psi) {
  if (psi.basis != Basis::position) throw UsageError("wigner_grid expects a position-basis grid");
  const std::size_t n = psi.grid.size;
  const double dq = psi.grid.step;
  const Grid1D pg{-2.0 * kPi / dq / 2.0, 2.0 * kPi / (static_cast<double>(n) * dq), n};
  WignerGrid out{psi.grid, pg, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};

  std::vector<cplx> row(n * n, 0.0);
  const auto half = static_cast<std::ptrdiff_t>(n / 2);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::ptrdiff_t m = -half; m < half; ++m) {
      const std::ptrdiff_t a = static_cast<std::ptrdiff_t>(j) + m, b = static_cast<std::ptrdiff_t>(j) - m;
      if (a < 0 || b < 0 || a >= static_cast<std::ptrdiff_t>(n) || b >= static_cast<std::ptrdiff_t>(n)) continue;
      const std::size_t slot = static_cast<std::size_t>((m + static_cast<std::ptrdiff_t>(n)) % static_cast<std::ptrdiff_t>(n));
      row[j * n + slot] = psi.amplitudes[static_cast<std::size_t>(a)] * std::conj(psi.amplitudes[static_cast<std::size_t>(b)]);
    }
  }
  detail::fft_batch(row.data(), n, n, FFTW_FORWARD);
  const double scale = 2.0 * dq / (4.0 * kPi);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < n; ++l) {
      // Output slot l holds frequency l for l < n/2 and l - n otherwise; p index is shifted by n/2.
      const std::size_t ip = (l + n / 2) % n;
      out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(ip)) = scale * std::real(row[j * n + l]);
    }
  return out;
}

/// Wigner function of mode 1 after the controlled-phase gate, W1(q1, p1) =
/// int dy f_G(y + p1)^2 W_psi(y, q1), with q1 on the momentum axis of `w_psi` and p1 on
/// a grid mirroring the position axis. values(ip1, iq1).
struct ClusterWigner {
  Grid1D q1;
  Grid1D p1;
  Eigen::MatrixXd values;

  /// int W1 dq1 at each p1 node.
  Eigen::VectorXd momentum_marginal() const { return values.rowwise().sum() * q1.step; }
  double integral() const { return values.sum() * q1.step * p1.step; }
};

inline ClusterWigner cluster_wigner(const WignerGrid& w_psi, const SqueezedVacuum& vac) {
  validate(vac);
  const Gaussian1D env{0.0, vac.position_variance(), 0.0};
  const std::size_t n = w_psi.q.size;
  const Grid1D p1{-w_psi.q.max(), w_psi.q.step, n};
  Eigen::MatrixXd K(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          env.density(w_psi.q.point(j) + p1.point(i)) * w_psi.q.step;
  return {w_psi.p, p1, K * w_psi.values};
}

/// Pointwise W1(q1, p1) by nested quadrature.
inline double cluster_wigner_function(const Wavefunction& psi, const SqueezedVacuum& vac, double q1,
                                      double p1, Tolerance tol = {}) {
  validate(vac);
  const double env_var = vac.position_variance();
  const Gaussian1D env{0.0, env_var, 0.0};
  const double s_e = std::sqrt(env_var);
  double lo = std::max(-p1 - detail::kTailSigmas * s_e, psi.q_mean - detail::kTailSigmas * psi.q_std);
  double hi = std::min(-p1 + detail::kTailSigmas * s_e, psi.q_mean + detail::kTailSigmas * psi.q_std);
  if (!(lo < hi)) return 0.0;
  const Tolerance inner{tol.abs * 1e-2, tol.rel * 1e-2};
  const auto pts = panel_breakpoints(lo, hi, std::min(s_e, psi.q_std), psi.q_mean, 200);
  auto integrand = [&](double y) { return env.density(y + p1) * wigner_function(psi, y, q1, inner); };
  return integrate(integrand, pts, tol).value;
}

/// |du/dt - d2u/dp1^2| by centered differences, u(p1, t) the outcome distribution with
/// envelope variance 2t.
inline double heat_residual(const Density& rho, double p1, double t, double h,
                            Tolerance tol = {1e-16, 1e-13}) {
  if (!(h > 0.0) || !(t > h)) throw DomainError("heat_residual: need t > h > 0");
  auto u = [&](double p, double tt) { return detail::outcome_distribution(rho, 2.0 * tt, p, tol); };
  const double u0 = u(p1, t);
  const double dt = (u(p1, t + h) - u(p1, t - h)) / (2.0 * h);
  const double dpp = (u(p1 + h, t) - 2.0 * u0 + u(p1 - h, t)) / (h * h);
  return std::abs(dt - dpp);
}

}  // namespace cvct
