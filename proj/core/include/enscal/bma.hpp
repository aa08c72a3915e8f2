#pragma once

#include <span>
#include <vector>

#include "enscal/ensemble.hpp"
#include "enscal/mixture.hpp"

namespace enscal {

enum class BmaVariant { kPureMl, kSimplified, kNaive };

const char* to_string(BmaVariant v);
BmaVariant bma_variant_from_string(const std::string& s);

/// Which value the location correction is anchored to each iteration.
/// kInitialRegression reproduces the published update verbatim; with mild
/// truncation it keeps component locations near the initial regression fit.
/// kCurrentAffine re-anchors to the freshly updated affine location instead
/// and exists for experimentation.
enum class CorrectionAnchor { kInitialRegression, kCurrentAffine };

struct BmaControls {
  int max_iterations = 500;
  double tolerance = 1e-6; // relative log-likelihood change
  CorrectionAnchor anchor = CorrectionAnchor::kInitialRegression;
};

struct EmDiagnostics {
  int iterations = 0;
  double initial_log_likelihood = 0.0;
  double final_log_likelihood = 0.0;
  bool converged = false;
  bool degenerate_regression = false;   // OLS fallback (alpha=mean diff, beta=1)
  bool sigma_floored = false;
  bool responsibilities_flagged = false; // zero-density case hit uniform fallback
  bool location_update_skipped = false;  // denominator underflow in a group
  std::vector<double> log_likelihood_trace; // entry 0 is the initial value
};

/// Fitted mixture model: per-member weight, per-group affine location
/// coefficients, one shared scale, all in transformed units.
struct BmaModel {
  GroupSpec group_spec;
  std::vector<double> weights; // per-member weight of each group; sum_k M_k w_k = 1
  std::vector<double> alpha;
  std::vector<double> beta;
  double sigma = 1.0;
  double lower = 0.0;
  double upper = 1.0;
  BmaVariant variant = BmaVariant::kPureMl;
  EmDiagnostics diagnostics;
};

/// Mutable EM iteration state, exposed so tests can drive and inspect single
/// steps.  Responsibilities z and locations mu are indexed [case][group][member].
struct EmState {
  GroupSpec spec;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<ForecastCase> training; // canonicalized copies
  std::vector<double> weights;        // per-member weight per group
  std::vector<double> alpha;
  std::vector<double> beta;
  double sigma = 1.0;
  std::vector<std::vector<std::vector<double>>> z;
  std::vector<std::vector<std::vector<double>>> mu0; // initial regression locations
  std::vector<std::vector<std::vector<double>>> mu;  // current locations
  int iteration = 0;
  EmDiagnostics diag;
};

/// Initial state: per-group OLS of observations on member values (pooled over
/// the group's members), sigma from the observation standard deviation, and a
/// uniform 1/M weight on every member.
EmState bma_init(std::span<const ForecastCase> training, const GroupSpec& spec,
                 double lower, double upper);

/// Responsibilities z proportional to weight times component density,
/// normalized per case.  Cases where every density underflows fall back to
/// uniform responsibilities and set a diagnostic flag.
void em_e_step(EmState& state);

/// Per-member weight = average responsibility of the group's members / M_k;
/// preserves sum_k M_k w_k = 1.
void em_update_weights(EmState& state);

/// Location update of the full-ML variant: closed-form conditional updates of
/// alpha_k and beta_k with the truncation offset term, then the mean
/// correction of the per-member locations.
void em_update_location(EmState& state,
                        CorrectionAnchor anchor = CorrectionAnchor::kInitialRegression);

/// Simplified variant: skip the alpha/beta update and apply only the mean
/// correction with the offset evaluated at the current locations.
void em_update_location_simplified(EmState& state);

/// Shared-scale update: responsibility-weighted squared residuals plus the
/// boundary correction term, averaged over cases.  Floors a non-positive
/// result and flags it.
void em_update_sigma(EmState& state);

/// Observed-data log-likelihood of the current state (current locations).
double em_log_likelihood(const EmState& state);

BmaModel bma_fit(std::span<const ForecastCase> training, const GroupSpec& spec,
                 double lower, double upper, BmaVariant variant,
                 const BmaControls& controls = {});

/// Predictive mixture: one component per member, located at
/// alpha_k + beta_k * f, all with the shared sigma and bounds.
TruncatedNormalMixture bma_predict(const BmaModel& model,
                                   const ForecastCase& fc);

} // namespace enscal
