#include "enscal/truncated_normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "enscal/normal.hpp"

namespace enscal {

namespace {

constexpr double kInvSqrtPi = 0.5641895835477562869480795;
constexpr double kSqrt2 = 1.4142135623730950488016887;
constexpr double kNormFloor = 1e-300;

// Phi(beta) - Phi(alpha) evaluated in whichever tail keeps full relative
// precision when both standardized bounds sit on the same side of zero.
double phi_range(double alpha, double beta) {
  double z;
  if (alpha >= 0.0) {
    z = norm_sf(alpha) - norm_sf(beta);
  } else {
    z = norm_cdf(beta) - norm_cdf(alpha);
  }
  return std::max(z, kNormFloor);
}

// t * pdf(t) with the t->+-inf limit (0) made explicit.
double t_phi(double t) {
  if (std::isinf(t)) return 0.0;
  return t * norm_pdf(t);
}

double phi_or_zero(double t) {
  if (std::isinf(t)) return 0.0;
  return norm_pdf(t);
}

} // namespace

TruncatedNormal::TruncatedNormal(double mu, double sigma, double lower,
                                 double upper)
    : mu_(mu), sigma_(sigma), lower_(lower), upper_(upper) {
  if (!std::isfinite(mu) || std::isnan(lower) || std::isnan(upper)) {
    throw std::invalid_argument("TruncatedNormal: non-finite location/bounds");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("TruncatedNormal: sigma must be positive");
  }
  if (!(lower < upper)) {
    throw std::invalid_argument("TruncatedNormal: requires lower < upper");
  }
  alpha_ = (lower_ - mu_) / sigma_;
  beta_ = (upper_ - mu_) / sigma_;
  cdf_alpha_ = std::isinf(alpha_) ? (alpha_ < 0 ? 0.0 : 1.0) : norm_cdf(alpha_);
  sf_alpha_ = std::isinf(alpha_) ? (alpha_ < 0 ? 1.0 : 0.0) : norm_sf(alpha_);
  cdf_beta_ = std::isinf(beta_) ? (beta_ < 0 ? 0.0 : 1.0) : norm_cdf(beta_);
  sf_beta_ = std::isinf(beta_) ? (beta_ < 0 ? 1.0 : 0.0) : norm_sf(beta_);
  z_range_ = phi_range(alpha_, beta_);
}

double TruncatedNormal::pdf(double x) const {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("TruncatedNormal::pdf: non-finite x");
  }
  if (x < lower_ || x > upper_) return 0.0;
  const double xi = (x - mu_) / sigma_;
  return norm_pdf(xi) / sigma_ / z_range_;
}

double TruncatedNormal::cdf(double x) const {
  if (std::isnan(x)) {
    throw std::invalid_argument("TruncatedNormal::cdf: NaN x");
  }
  if (x <= lower_) return 0.0;
  if (x >= upper_) return 1.0;
  const double xi = (x - mu_) / sigma_;
  double r;
  if (alpha_ >= 0.0) {
    r = (sf_alpha_ - norm_sf(xi)) / z_range_;
  } else {
    r = (norm_cdf(xi) - cdf_alpha_) / z_range_;
  }
  return std::clamp(r, 0.0, 1.0);
}

double TruncatedNormal::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("TruncatedNormal::quantile: p outside (0, 1)");
  }
  // Probe whichever normal tail the target lands in to avoid the cancellation
  // of forming 1 - tiny.
  const double u = cdf_alpha_ + p * z_range_;
  double x;
  if (u <= 0.5) {
    x = mu_ + sigma_ * norm_quantile(std::max(u, 1e-300));
  } else {
    const double v = sf_beta_ + (1.0 - p) * z_range_;
    x = mu_ - sigma_ * norm_quantile(std::max(v, 1e-300));
  }
  return std::clamp(x, lower_, upper_);
}

double TruncatedNormal::mean() const {
  return mu_ + tn_mean_offset(mu_, sigma_, lower_, upper_);
}

double TruncatedNormal::variance() const {
  const double r1 = (t_phi(alpha_) - t_phi(beta_)) / z_range_;
  const double r2 = (phi_or_zero(alpha_) - phi_or_zero(beta_)) / z_range_;
  return sigma_ * sigma_ * (1.0 + r1 - r2 * r2);
}

// Antiderivative machinery for the closed-form CRPS.  With
//   P1(t) = t Phi(t) + phi(t)
//   P2(t) = t Phi(t)^2 + 2 phi(t) Phi(t) - Phi(t sqrt2)/sqrt(pi)
// the squared-CDF integrals over the support reduce to differences of
//   Q(t, q) = q^2 t - 2 q P1(t) + P2(t)
//           = t (g - s)^2 + 2 phi(t) (g - s) - Phi(t sqrt2)/sqrt(pi),
// where q is the parent-normal CDF at the relevant bound, g = 1 - q, and
// s = 1 - Phi(t).  The first form is exact in the lower tail, the second in
// the upper tail; q selects the branch.  Limits: Q(-inf, 0) = 0 and
// Q(+inf, 1) = -1/sqrt(pi).
double TruncatedNormal::q_bracket(double t, double q, double g) {
  if (std::isinf(t)) {
    return t < 0 ? 0.0 : -kInvSqrtPi;
  }
  const double tail = norm_cdf(t * kSqrt2) * kInvSqrtPi;
  if (q > 0.5) {
    const double delta = g - norm_sf(t);
    return t * delta * delta + 2.0 * norm_pdf(t) * delta - tail;
  }
  const double cdf_t = norm_cdf(t);
  const double pdf_t = norm_pdf(t);
  const double p1 = t * cdf_t + pdf_t;
  const double p2 = t * cdf_t * cdf_t + 2.0 * pdf_t * cdf_t - tail;
  return q * q * t - 2.0 * q * p1 + p2;
}

double TruncatedNormal::crps(double x) const {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("TruncatedNormal::crps: non-finite x");
  }
  if (z_range_ < 1e-150) {
    // Numerically degenerate: all mass sits in a sliver at the nearer bound.
    const double point = std::clamp(mu_, lower_, upper_);
    return std::fabs(x - point);
  }
  const double w = (x - mu_) / sigma_;
  const double wc = std::clamp(w, alpha_, beta_);
  const double i1 = q_bracket(wc, cdf_alpha_, sf_alpha_) -
                    q_bracket(alpha_, cdf_alpha_, sf_alpha_);
  const double i2 = q_bracket(beta_, cdf_beta_, sf_beta_) -
                    q_bracket(wc, cdf_beta_, sf_beta_);
  const double inside = (i1 + i2) / (z_range_ * z_range_);
  return sigma_ * (std::fabs(w - wc) + std::max(inside, 0.0));
}

double tn_mean_offset(double mu, double sigma, double lower, double upper) {
  const double alpha = (lower - mu) / sigma;
  const double beta = (upper - mu) / sigma;
  return sigma * (phi_or_zero(alpha) - phi_or_zero(beta)) /
         phi_range(alpha, beta);
}

double tn_variance_correction(double mu, double sigma, double lower,
                              double upper) {
  const double alpha = (lower - mu) / sigma;
  const double beta = (upper - mu) / sigma;
  return sigma * sigma * (t_phi(beta) - t_phi(alpha)) / phi_range(alpha, beta);
}

double tn_normalizer(double mu, double sigma, double lower, double upper) {
  return phi_range((lower - mu) / sigma, (upper - mu) / sigma);
}

} // namespace enscal
