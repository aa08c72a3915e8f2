#pragma once

namespace enscal {

/// Standard normal density.
double norm_pdf(double x);

/// Standard normal CDF, accurate to full double precision in both tails.
double norm_cdf(double x);

/// Upper tail 1 - Phi(x) without cancellation for large positive x.
double norm_sf(double x);

/// Inverse of norm_cdf on (0, 1).  Throws std::invalid_argument outside (0, 1).
double norm_quantile(double p);

/// Complementary error function (Cody's rational approximations).
/// Self-contained so ports of this library agree bit-for-bit at the
/// 1e-12 level instead of inheriting each platform's libm.
double erfc_cody(double x);

} // namespace enscal
