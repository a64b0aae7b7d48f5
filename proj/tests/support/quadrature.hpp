// Test-tree numerical oracles.
//
// Adaptive Simpson quadrature used to validate every closed-form identity in
// the library against an independent numerical evaluation. Lives in the test
// tree on purpose: the library itself never integrates numerically, so a bug
// cannot hide in a routine shared between implementation and oracle.
//
// SPDX-License-Identifier: MIT

#pragma once

#include <cmath>
#include <cstdlib>

namespace oracle {

namespace detail {

template <typename F>
double simpson(const F& f, double a, double fa, double b, double fb,
               double& fm_out) {
  const double m = 0.5 * (a + b);
  fm_out = f(m);
  return (b - a) / 6.0 * (fa + 4.0 * fm_out + fb);
}

// Classic adaptive Simpson with Richardson correction. `tol` is an absolute
// tolerance for this subinterval and halves on each split; once it falls
// below the roundoff floor of the interval's own magnitude, further
// splitting only chases noise, so the recursion stops there.
template <typename F>
double adapt(const F& f, double a, double fa, double m, double fm, double b,
             double fb, double whole, double tol, int depth) {
  double flm, frm;
  const double left = simpson(f, a, fa, m, fm, flm);
  const double right = simpson(f, m, fm, b, fb, frm);
  const double delta = left + right - whole;
  const double floor =
      1e-16 * (std::abs(left) + std::abs(right));
  if (depth <= 0 || std::abs(delta) <= 15.0 * std::max(tol, floor)) {
    return left + right + delta / 15.0;
  }
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  return adapt(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Integrate f over [a, b]. The effective absolute tolerance is
/// max(abs_tol, rel_tol * |coarse estimate|): closed forms under random
/// parameter draws span many orders of magnitude, and a purely absolute
/// tolerance would let small-magnitude cases terminate at garbage precision.
/// The interval is pre-split into `pieces` equal panels so narrow features
/// away from the midpoint cannot be missed by the first coarse estimates.
template <typename F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-12,
                 double abs_tol = 1e-300, int pieces = 16, int max_depth = 24) {
  if (!(b > a)) return 0.0;
  // Coarse magnitude estimate over the pre-split panels.
  const double h = (b - a) / pieces;
  double coarse = 0.0;
  for (int i = 0; i < pieces; ++i) {
    const double x0 = a + i * h;
    const double x1 = x0 + h;
    coarse += h / 6.0 *
              (f(x0) + 4.0 * f(0.5 * (x0 + x1)) + f(x1));
  }
  const double tol_total = std::max(abs_tol, rel_tol * std::abs(coarse));
  double sum = 0.0;
  for (int i = 0; i < pieces; ++i) {
    const double x0 = a + i * h;
    const double x1 = x0 + h;
    const double fa = f(x0);
    const double fb = f(x1);
    double fm;
    const double whole = detail::simpson(f, x0, fa, x1, fb, fm);
    sum += detail::adapt(f, x0, fa, 0.5 * (x0 + x1), fm, x1, fb, whole,
                         tol_total / pieces, max_depth);
  }
  return sum;
}

/// Relative difference |a - b| / max(|a|, |b|), with exact zero treated as a
/// match. Used by every closed-form-vs-oracle comparison below.
inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return 0.0;
  return std::abs(a - b) / scale;
}

}  // namespace oracle
