#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "rdiag/error.hpp"

namespace rdiag::roots {

struct Options {
  double f_tol = 0.0;  // stop once |f(x) - target| <= f_tol
  int max_iter = 200;
};

struct Result {
  double x = 0.0;
  double residual = 0.0;  // |f(x) - target|
  int iterations = 0;
};

// Solves f(x) = target for a strictly monotone f on a bracket [lo, hi] whose
// endpoint values straddle the target. `eval(x)` returns {f(x), f'(x)}.
// Newton steps are taken when they stay strictly inside the current bracket
// and shrink the residual; otherwise the bracket is bisected, geometrically
// when it spans more than a factor of 8 on the positive axis.
template <class Eval>
Result solve_monotone(Eval&& eval, double target, double lo, double hi, const Options& opt = {}) {
  auto [f_lo, d_lo] = eval(lo);
  auto [f_hi, d_hi] = eval(hi);
  (void)d_lo;
  (void)d_hi;
  const bool increasing = f_hi > f_lo;
  auto below = [&](double f) { return increasing ? f < target : f > target; };
  if (below(f_hi) || !below(f_lo)) {
    if (f_lo == target) return {lo, 0.0, 0};
    if (f_hi == target) return {hi, 0.0, 0};
    fail(ErrorCode::no_convergence, "solve_monotone: target not bracketed");
  }

  double x = 0.5 * (lo + hi);
  double best_x = x;
  double best_res = std::numeric_limits<double>::infinity();
  double prev_res = std::numeric_limits<double>::infinity();
  double candidate = std::numeric_limits<double>::quiet_NaN();
  bool newton_ok = true;

  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    const bool use_newton = newton_ok && candidate > lo && candidate < hi;
    if (use_newton) {
      if (std::abs(candidate - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) {
        return {best_x, best_res, iter - 1};
      }
      x = candidate;
    } else if (lo > 0.0 && hi > 8.0 * lo) {
      x = std::sqrt(lo) * std::sqrt(hi);
    } else {
      x = lo + 0.5 * (hi - lo);
    }
    auto [f, df] = eval(x);
    const double res = std::abs(f - target);
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
    if (res <= opt.f_tol) return {x, res, iter};
    if (below(f)) {
      lo = x;
    } else {
      hi = x;
    }
    if (!(hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x))) {
      return {best_x, best_res, iter};
    }
    // A Newton step that fails to halve the residual forces one bisection.
    newton_ok = !(use_newton && res > 0.5 * prev_res);
    candidate = (std::isfinite(df) && df != 0.0) ? x - (f - target) / df
                                                 : std::numeric_limits<double>::quiet_NaN();
    prev_res = res;
  }
  fail(ErrorCode::no_convergence, "solve_monotone: iteration cap reached");
}

}  // namespace rdiag::roots
