#pragma once

#include <span>
#include <vector>

#include "enscal/ensemble.hpp"
#include "enscal/truncated_normal.hpp"

namespace enscal {

struct EmosDiagnostics {
  int evaluations = 0;
  double final_mean_crps = 0.0;
  bool converged = false;
  bool sigma_floored = false; // predicted variance hit the floor during fitting
};

/// Truncated normal regression model: location affine in the exchangeable
/// group means, variance affine in the pooled ensemble variance.  Scale
/// coefficients are nonnegative by construction (optimized as square roots).
struct EmosModel {
  GroupSpec group_spec;
  std::vector<double> a; // a0, a1..aK (intercept first)
  double b0 = 1.0;
  double b1 = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  EmosDiagnostics diagnostics;
};

struct EmosFeatures {
  std::vector<double> group_means;
  double ensemble_variance = 0.0; // unbiased, pooled over all members
  bool single_member = false;     // M == 1, variance reported as 0
};

struct EmosControls {
  double f_tolerance = 1e-9;
  int max_evaluations = 10000;
  int restarts = 1;
};

EmosFeatures emos_features(const ForecastCase& fc, const GroupSpec& spec);

TruncatedNormal emos_predict(const EmosModel& model, const ForecastCase& fc);

/// Minimum-CRPS estimation over the training window by simplex descent.
EmosModel emos_fit(std::span<const ForecastCase> training,
                   const GroupSpec& spec, double lower, double upper,
                   const EmosControls& controls = {});

} // namespace enscal
