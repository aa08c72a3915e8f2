#include "enscal/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "enscal/quadrature.hpp"

namespace enscal {

TruncatedNormalMixture::TruncatedNormalMixture(
    std::vector<TruncatedNormal> components, std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  if (components_.empty() || components_.size() != weights_.size()) {
    throw std::invalid_argument(
        "TruncatedNormalMixture: components/weights size mismatch");
  }
  lower_ = components_.front().lower();
  upper_ = components_.front().upper();
  double total = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].lower() != lower_ || components_[i].upper() != upper_) {
      throw std::invalid_argument(
          "TruncatedNormalMixture: components must share truncation bounds");
    }
    if (weights_[i] < 0.0) {
      throw std::invalid_argument("TruncatedNormalMixture: negative weight");
    }
    total += weights_[i];
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("TruncatedNormalMixture: weights must sum to 1");
  }
  split_points_.reserve(components_.size());
  for (const auto& c : components_) split_points_.push_back(c.mu());
  std::sort(split_points_.begin(), split_points_.end());
}

double TruncatedNormalMixture::pdf(double x) const {
  double v = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    v += weights_[i] * components_[i].pdf(x);
  }
  return v;
}

double TruncatedNormalMixture::cdf(double x) const {
  double v = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    v += weights_[i] * components_[i].cdf(x);
  }
  return std::clamp(v, 0.0, 1.0);
}

double TruncatedNormalMixture::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument(
        "TruncatedNormalMixture::quantile: p outside (0, 1)");
  }
  // The mixture quantile lies between the extreme component quantiles; for
  // finite shared bounds that bracket is already inside [lower, upper].
  double lo = components_.front().quantile(p);
  double hi = lo;
  for (std::size_t i = 1; i < components_.size(); ++i) {
    const double q = components_[i].quantile(p);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-10; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double TruncatedNormalMixture::crps(double x) const {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("TruncatedNormalMixture::crps: non-finite x");
  }
  // Infinite shared bounds: integrate over the numerically relevant range.
  const double lo_eff =
      std::isfinite(lower_) ? lower_ : std::min(quantile(1e-12), x);
  const double hi_eff =
      std::isfinite(upper_) ? upper_ : std::max(quantile(1.0 - 1e-12), x);
  const double xc = std::clamp(x, lo_eff, hi_eff);
  const double penalty = std::fabs(x - xc);
  const auto sq_cdf = [this](double t) {
    const double f = cdf(t);
    return f * f;
  };
  const auto sq_sf = [this](double t) {
    const double f = 1.0 - cdf(t);
    return f * f;
  };
  const double i1 =
      integrate_piecewise(sq_cdf, lo_eff, xc, split_points_, 1e-8);
  const double i2 =
      integrate_piecewise(sq_sf, xc, hi_eff, split_points_, 1e-8);
  return penalty + i1 + i2;
}

} // namespace enscal
