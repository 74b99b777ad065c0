#pragma once

// Bracketed scalar maximization: a coarse uniform scan locates the best
// sample, then golden-section search (GSL) refines inside its neighbours.

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>

#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "cvct/errors.hpp"
#include "cvct/quadrature.hpp"

namespace cvct {

struct MaximizeResult {
  double argmax = 0.0;
  double value = 0.0;
  int iterations = 0;
};

struct MaximizeOptions {
  std::size_t scan_points = 101;
  double tolerance = 1e-6;  // absolute, in the argument
  int max_iterations = 200;
  // When false an argmax on the scan boundary is an error (no interior maximum bracketed).
  bool allow_boundary = false;
};

namespace detail {

struct MinimizerDeleter {
  void operator()(gsl_min_fminimizer* m) const { gsl_min_fminimizer_free(m); }
};

}  // namespace detail

template <class F>
MaximizeResult maximize_scalar(F&& f, double lo, double hi, MaximizeOptions opt = {}) {
  if (!(hi > lo)) throw UsageError("maximize_scalar: empty search interval");
  if (opt.scan_points < 3) throw UsageError("maximize_scalar: need at least three scan points");

  const std::size_t n = opt.scan_points;
  std::vector<double> xs(n), ys(n);
  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    ys[i] = f(xs[i]);
    if (!std::isfinite(ys[i])) throw SearchError("maximize_scalar: objective is not finite");
    if (ys[i] > ys[best]) best = i;
  }
  if (best == 0 || best == n - 1) {
    if (!opt.allow_boundary)
      throw SearchError("maximize_scalar: maximum at the edge of [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "], no interior extremum bracketed");
    return {xs[best], ys[best], 0};
  }
  // Plateau around the sample: golden section needs a strict bracket.
  if (!(ys[best] > ys[best - 1] && ys[best] > ys[best + 1])) return {xs[best], ys[best], 0};

  detail::disable_gsl_abort();
  using Fn = std::remove_reference_t<F>;
  struct Negated {
    Fn* fn;
    double operator()(double x) const { return -(*fn)(x); }
  } neg{&f};
  detail::GslThunk<Negated> thunk{&neg, nullptr};
  gsl_function gf{&detail::GslThunk<Negated>::call, &thunk};

  std::unique_ptr<gsl_min_fminimizer, detail::MinimizerDeleter> m(
      gsl_min_fminimizer_alloc(gsl_min_fminimizer_goldensection));
  int status = gsl_min_fminimizer_set_with_values(m.get(), &gf, xs[best], -ys[best], xs[best - 1],
                                                  -ys[best - 1], xs[best + 1], -ys[best + 1]);
  if (status != GSL_SUCCESS) throw SearchError(std::string("maximize_scalar: ") + gsl_strerror(status));

  MaximizeResult out{xs[best], ys[best], 0};
  for (int it = 1; it <= opt.max_iterations; ++it) {
    status = gsl_min_fminimizer_iterate(m.get());
    if (thunk.failure) std::rethrow_exception(thunk.failure);
    // GSL_FAILURE here means the new probe tied the incumbent: the objective is flat at
    // working precision and the bracket cannot shrink further.
    if (status == GSL_FAILURE) break;
    if (status != GSL_SUCCESS) throw SearchError(std::string("maximize_scalar: ") + gsl_strerror(status));
    out.iterations = it;
    const double a = gsl_min_fminimizer_x_lower(m.get());
    const double b = gsl_min_fminimizer_x_upper(m.get());
    if (gsl_min_test_interval(a, b, opt.tolerance, 0.0) == GSL_SUCCESS) break;
  }
  out.argmax = gsl_min_fminimizer_x_minimum(m.get());
  out.value = -gsl_min_fminimizer_f_minimum(m.get());
  return out;
}

}  // namespace cvct
