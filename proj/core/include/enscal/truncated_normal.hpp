#pragma once

namespace enscal {

/// Normal distribution with location mu and scale sigma conditioned to lie in
/// [lower, upper] and renormalized.  Bounds may be +-infinity, so one-sided and
/// untruncated limits run through the same code path.  Immutable; all methods
/// are pure and thread-safe.
class TruncatedNormal {
 public:
  TruncatedNormal(double mu, double sigma, double lower, double upper);

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

  /// Density at x; zero outside [lower, upper].  Throws on non-finite x.
  double pdf(double x) const;

  /// Distribution function, clamped to 0 below lower and 1 above upper.
  double cdf(double x) const;

  /// Inverse CDF on (0, 1), computed through the normal quantile function.
  double quantile(double p) const;

  /// Mean of the truncated distribution (>= lower, <= upper).
  double mean() const;

  /// Variance of the truncated distribution (< sigma^2 for finite bounds).
  double variance() const;

  /// Continuous ranked probability score of this distribution against an
  /// observation, in closed form.  Observations outside the support incur the
  /// linear out-of-support penalty implied by the flat CDF.
  double crps(double x) const;

 private:
  static double q_bracket(double t, double q, double g);

  double mu_, sigma_, lower_, upper_;
  double alpha_, beta_;    // standardized bounds, may be +-inf
  double cdf_alpha_;       // Phi(alpha)
  double sf_alpha_;        // 1 - Phi(alpha)
  double cdf_beta_;
  double sf_beta_;
  double z_range_;         // Phi(beta) - Phi(alpha), floored at 1e-300
};

/// kappa - mu: by how much truncation to [lower, upper] shifts the mean of a
/// normal with location mu away from mu.  Vanishes for infinite bounds.
double tn_mean_offset(double mu, double sigma, double lower, double upper);

/// sigma^2 - E[(X - mu)^2] for X truncated normal: the boundary term of the
/// scale update.  Vanishes for infinite bounds.
double tn_variance_correction(double mu, double sigma, double lower,
                              double upper);

/// Phi((upper-mu)/sigma) - Phi((lower-mu)/sigma) with tail-aware evaluation
/// and a 1e-300 floor.
double tn_normalizer(double mu, double sigma, double lower, double upper);

} // namespace enscal
