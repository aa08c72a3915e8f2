#pragma once

#include <vector>

#include "enscal/truncated_normal.hpp"

namespace enscal {

/// Finite mixture of truncated normals sharing one pair of truncation bounds.
/// Weights are nonnegative and sum to 1 (checked to 1e-12).  Immutable.
class TruncatedNormalMixture {
 public:
  TruncatedNormalMixture(std::vector<TruncatedNormal> components,
                         std::vector<double> weights);

  const std::vector<TruncatedNormal>& components() const { return components_; }
  const std::vector<double>& weights() const { return weights_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

  double pdf(double x) const;
  double cdf(double x) const;

  /// Inverse CDF by bracketed bisection, absolute tolerance 1e-10.
  double quantile(double p) const;
  double median() const { return quantile(0.5); }

  /// CRPS by adaptive quadrature of the squared-CDF integrals, split at the
  /// observation and at every component location so the kink and any steep
  /// component edges land on panel boundaries.  Relative tolerance 1e-8.
  double crps(double x) const;

 private:
  std::vector<TruncatedNormal> components_;
  std::vector<double> weights_;
  std::vector<double> split_points_; // sorted component locations
  double lower_, upper_;
};

} // namespace enscal
