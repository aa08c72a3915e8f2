#include "enscal/boxcox.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace enscal {

namespace {
constexpr double kLogBranch = 1e-8;
}

double bc_transform(double x, double lambda) {
  if (!(x > 0.0)) {
    throw std::invalid_argument("bc_transform: requires x > 0");
  }
  if (std::fabs(lambda) < kLogBranch) {
    return std::log(x);
  }
  return (std::pow(x, lambda) - 1.0) / lambda;
}

double bc_inverse(double y, double lambda) {
  if (std::fabs(lambda) < kLogBranch) {
    return std::exp(y);
  }
  const double base = lambda * y + 1.0;
  if (!(base > 0.0)) {
    throw std::domain_error("bc_inverse: lambda*y + 1 must be positive");
  }
  return std::pow(base, 1.0 / lambda);
}

double bc_profile_loglik(std::span<const double> observations, double lambda) {
  const std::size_t n = observations.size();
  double sum_log = 0.0;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = bc_transform(observations[i], lambda);
    sum_log += std::log(observations[i]);
  }
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double var_mle = std::max(ss / static_cast<double>(n), 1e-300);
  return -0.5 * static_cast<double>(n) * std::log(var_mle) +
         (lambda - 1.0) * sum_log;
}

BoxCoxParam bc_fit_lambda(std::span<const double> observations,
                          const LambdaGrid& grid, int lead_time_h) {
  if (observations.size() < 30) {
    throw std::invalid_argument(
        "bc_fit_lambda: needs at least 30 observations for a stable fit");
  }
  if (!(grid.lo < grid.hi) || !(grid.step > 0.0)) {
    throw std::invalid_argument("bc_fit_lambda: invalid grid");
  }
  double best_lambda = grid.lo;
  double best_ll = -std::numeric_limits<double>::infinity();
  // Ascending scan with strict improvement keeps the smallest argmax.
  const int n_steps =
      static_cast<int>(std::floor((grid.hi - grid.lo) / grid.step + 0.5));
  for (int i = 0; i <= n_steps; ++i) {
    const double lambda = grid.lo + i * grid.step;
    if (lambda > grid.hi + 0.5 * grid.step) break;
    const double ll = bc_profile_loglik(observations, lambda);
    if (ll > best_ll) {
      best_ll = ll;
      best_lambda = lambda;
    }
  }
  return BoxCoxParam{best_lambda, lead_time_h,
                     static_cast<int>(observations.size())};
}

} // namespace enscal
