#pragma once

#include <cmath>
#include <cstdlib>
#include <span>

namespace enscal {

/// Adaptive Simpson integration.  Tolerance is relative to the running
/// whole-interval estimate with a small absolute floor; recursion depth is
/// capped (default 50) so pathological integrands terminate.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol,
                          int max_depth = 50) {
  if (!(b > a)) return 0.0;
  struct Impl {
    const F& f;
    double eps_abs;
    double recurse(double lo, double hi, double flo, double fmid, double fhi,
                   double whole, double eps, int depth) const {
      const double mid = 0.5 * (lo + hi);
      const double lmid = 0.5 * (lo + mid);
      const double rmid = 0.5 * (mid + hi);
      const double flm = f(lmid);
      const double frm = f(rmid);
      const double h = hi - lo;
      const double left = h / 12.0 * (flo + 4.0 * flm + fmid);
      const double right = h / 12.0 * (fmid + 4.0 * frm + fhi);
      const double delta = left + right - whole;
      if (depth <= 0 || std::fabs(delta) <= 15.0 * std::max(eps, eps_abs)) {
        return left + right + delta / 15.0;
      }
      return recurse(lo, mid, flo, flm, fmid, left, 0.5 * eps, depth - 1) +
             recurse(mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth - 1);
    }
  };
  const double fa = f(a);
  const double mid = 0.5 * (a + b);
  const double fm = f(mid);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double eps = rel_tol * std::max(std::fabs(whole), 1e-12);
  Impl impl{f, 1e-16};
  return impl.recurse(a, b, fa, fm, fb, whole, eps, max_depth);
}

/// Integrate piecewise between sorted interior breakpoints.  Used for mixture
/// CRPS integrals whose integrands have sharp features at component locations.
template <typename F>
double integrate_piecewise(F&& f, double a, double b,
                           std::span<const double> breakpoints, double rel_tol,
                           int max_depth = 50) {
  double total = 0.0;
  double lo = a;
  for (double bp : breakpoints) {
    if (bp <= lo || bp >= b) continue;
    total += integrate_adaptive(f, lo, bp, rel_tol, max_depth);
    lo = bp;
  }
  total += integrate_adaptive(f, lo, b, rel_tol, max_depth);
  return total;
}

} // namespace enscal
