#pragma once

#include <cmath>

namespace serrin {

namespace detail {

template <class F>
double simpson_step(F &f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

template <class F> double adaptive_simpson(F &&f, double a, double b, double tol) {
  // Start from a fixed subdivision so periodic integrands are not
  // mistaken for converged after the first coarse step.
  constexpr int pieces = 16;
  double total = 0.0;
  const double width = (b - a) / pieces;
  for (int i = 0; i < pieces; ++i) {
    const double lo = a + i * width;
    const double hi = lo + width;
    const double flo = f(lo);
    const double fmid = f(0.5 * (lo + hi));
    const double fhi = f(hi);
    const double whole = width / 6.0 * (flo + 4.0 * fmid + fhi);
    total += detail::simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol / pieces, 40);
  }
  return total;
}

template <class F> double golden_minimize(F &&f, double lo, double hi, double tol) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace serrin
