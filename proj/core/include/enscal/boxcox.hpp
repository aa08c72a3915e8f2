#pragma once

#include <span>

namespace enscal {

/// Fitted Box-Cox coefficient together with the data slice it came from.
struct BoxCoxParam {
  double lambda = 1.0;
  int lead_time_h = 0;
  int sample_count = 0;
};

struct LambdaGrid {
  double lo = -1.0;
  double hi = 2.0;
  double step = 0.01;
};

/// (x^lambda - 1)/lambda, or log(x) when |lambda| < 1e-8.  Requires x > 0.
double bc_transform(double x, double lambda);

/// Inverse transform.  Requires lambda*y + 1 > 0 for lambda != 0; a violation
/// means a quantile escaped the feasible region and is reported as a domain
/// error, callers clamp to bounds first.
double bc_inverse(double y, double lambda);

/// Grid search for the lambda maximizing the Box-Cox profile log-likelihood
/// (Gaussian log-likelihood of the transformed sample plus the Jacobian term
/// (lambda-1) * sum(log x)).  Ties break toward the smaller lambda.
/// Requires at least 30 observations.
BoxCoxParam bc_fit_lambda(std::span<const double> observations,
                          const LambdaGrid& grid, int lead_time_h = 0);

/// The profile log-likelihood the fit maximizes, exposed for exhaustive
/// argmax checks.
double bc_profile_loglik(std::span<const double> observations, double lambda);

} // namespace enscal
