#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace enscal {

struct NelderMeadOptions {
  double f_tolerance = 1e-9; // stop when the simplex f-spread falls below this
  int max_evaluations = 10000;
  int restarts = 1; // fresh simplex around the incumbent after convergence
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

template <typename F>
NelderMeadResult nm_single(F& f, std::vector<double> x0,
                           const std::vector<double>& steps, double ftol,
                           int max_evals, int& evals) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += steps[i];
  for (std::size_t i = 0; i <= n; ++i) {
    fv[i] = f(pts[i]);
    ++evals;
  }
  std::vector<std::size_t> order(n + 1);

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;
  bool converged = false;
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];
    if (fv[worst] - fv[best] < ftol) {
      converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t d = 0; d < n; ++d) {
        p[d] = centroid[d] + t * (centroid[d] - pts[worst][d]);
      }
      return p;
    };

    std::vector<double> refl = blend(alpha);
    const double f_refl = f(refl);
    ++evals;
    if (f_refl < fv[order[0]]) {
      std::vector<double> expd = blend(gamma);
      const double f_expd = f(expd);
      ++evals;
      if (f_expd < f_refl) {
        pts[worst] = std::move(expd);
        fv[worst] = f_expd;
      } else {
        pts[worst] = std::move(refl);
        fv[worst] = f_refl;
      }
      continue;
    }
    if (f_refl < fv[second]) {
      pts[worst] = std::move(refl);
      fv[worst] = f_refl;
      continue;
    }
    std::vector<double> contr = blend(f_refl < fv[worst] ? rho : -rho);
    const double f_contr = f(contr);
    ++evals;
    if (f_contr < std::min(f_refl, fv[worst])) {
      pts[worst] = std::move(contr);
      fv[worst] = f_contr;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) { // shrink toward the best vertex
      if (i == best) continue;
      for (std::size_t d = 0; d < n; ++d) {
        pts[i][d] = pts[best][d] + shrink * (pts[i][d] - pts[best][d]);
      }
      fv[i] = f(pts[i]);
      ++evals;
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (fv[i] < fv[best]) best = i;
  }
  return {pts[best], fv[best], evals, converged};
}

} // namespace detail

/// Derivative-free simplex descent with optional restarts.  Deterministic for
/// a fixed objective and start.
template <typename F>
NelderMeadResult nelder_mead(F&& f, const std::vector<double>& x0,
                             const std::vector<double>& steps,
                             const NelderMeadOptions& opts = {}) {
  int evals = 0;
  NelderMeadResult best =
      detail::nm_single(f, x0, steps, opts.f_tolerance, opts.max_evaluations, evals);
  for (int r = 0; r < opts.restarts && evals < opts.max_evaluations; ++r) {
    std::vector<double> small_steps(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) small_steps[i] = 0.1 * steps[i];
    NelderMeadResult next = detail::nm_single(
        f, best.x, small_steps, opts.f_tolerance, opts.max_evaluations, evals);
    if (next.f <= best.f) {
      best = std::move(next);
    }
  }
  best.evaluations = evals;
  return best;
}

} // namespace enscal
