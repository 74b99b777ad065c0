#pragma once

// Adaptive Gauss-Kronrod integration over a panelled finite interval.
//
// Backed by GSL's QAGP routine (21-point Kronrod rule, global bisection of the
// worst panel, epsilon-algorithm extrapolation). Callers seed the panel layout
// with breakpoints so narrow Gaussian peaks are never stepped over.

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "cvct/errors.hpp"

namespace cvct {

struct Tolerance {
  double abs = 1e-10;
  double rel = 1e-8;

  double target(double value) const { return std::max(abs, rel * std::abs(value)); }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

inline void disable_gsl_abort() {
  static std::once_flag flag;
  std::call_once(flag, [] { gsl_set_error_handler_off(); });
}

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

template <class F>
struct GslThunk {
  F* fn;
  std::exception_ptr failure;

  static double call(double x, void* self) {
    auto* t = static_cast<GslThunk*>(self);
    if (t->failure) return 0.0;
    try {
      return (*t->fn)(x);
    } catch (...) {
      t->failure = std::current_exception();
      return 0.0;
    }
  }
};

constexpr std::size_t kQuadratureLimit = 2000;

}  // namespace detail

/// Integrate f over [breakpoints.front(), breakpoints.back()], with the interior
/// breakpoints as initial panel boundaries. Breakpoints must be ascending.
template <class F>
QuadratureResult integrate(F&& f, std::span<const double> breakpoints, Tolerance tol = {}) {
  if (breakpoints.size() < 2) throw UsageError("integrate: need at least two breakpoints");
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
    throw UsageError("integrate: breakpoints must be ascending");
  if (breakpoints.front() == breakpoints.back()) return {};

  detail::disable_gsl_abort();
  using Fn = std::remove_reference_t<F>;
  detail::GslThunk<Fn> thunk{&f, nullptr};
  gsl_function gf{&detail::GslThunk<Fn>::call, &thunk};

  std::unique_ptr<gsl_integration_workspace, detail::WorkspaceDeleter> ws(
      gsl_integration_workspace_alloc(detail::kQuadratureLimit));
  std::vector<double> pts(breakpoints.begin(), breakpoints.end());
  // QAGP rejects zero-length panels.
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  QuadratureResult out;
  const int status = gsl_integration_qagp(&gf, pts.data(), pts.size(), tol.abs, tol.rel,
                                          detail::kQuadratureLimit, ws.get(), &out.value,
                                          &out.error);
  if (thunk.failure) std::rethrow_exception(thunk.failure);
  // A roundoff verdict at an error already near double precision is a converged result.
  const double floor = status == GSL_EROUND ? 100.0 * DBL_EPSILON * std::abs(out.value) : 0.0;
  if (status != GSL_SUCCESS && out.error > std::max(tol.target(out.value), floor)) {
    throw NumericalError(std::string("quadrature did not converge: ") + gsl_strerror(status),
                         out.error, tol.target(out.value));
  }
  return out;
}

template <class F>
QuadratureResult integrate(F&& f, double a, double b, Tolerance tol = {}) {
  if (a > b) {
    auto r = integrate(std::forward<F>(f), b, a, tol);
    return {-r.value, r.error};
  }
  const double pts[2] = {a, b};
  return integrate(std::forward<F>(f), std::span<const double>(pts, 2), tol);
}

/// Breakpoints covering [lo, hi] with panels no wider than `spacing`,
/// with an extra breakpoint at `anchor` when it falls inside.
inline std::vector<double> panel_breakpoints(double lo, double hi, double spacing, double anchor,
                                             std::size_t max_panels = 400) {
  if (!(hi > lo)) return {lo, hi};
  std::size_t panels = static_cast<std::size_t>(std::ceil((hi - lo) / spacing));
  panels = std::clamp<std::size_t>(panels, 1, max_panels);
  std::vector<double> pts;
  pts.reserve(panels + 2);
  for (std::size_t i = 0; i <= panels; ++i)
    pts.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(panels));
  pts.back() = hi;
  if (anchor > lo && anchor < hi) {
    pts.push_back(anchor);
    std::sort(pts.begin(), pts.end());
  }
  return pts;
}

}  // namespace cvct
