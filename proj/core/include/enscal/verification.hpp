#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "enscal/mixture.hpp"
#include "enscal/rng.hpp"

namespace enscal {

enum class ScoreKind {
  kCrpsCm,
  kAbsErrCm,
  kPit,
  kIntervalHit,
  kIntervalWidthCm,
};

struct CaseKey {
  long day = 0;
  int lead_time_h = 0;
  bool operator==(const CaseKey&) const = default;
};

/// Per-case score values aligned one-to-one with verification cases.  A case
/// with any missing input never enters a series: joint dropping happens when
/// series are assembled, so compared series always align.
struct ScoreSeries {
  ScoreKind kind = ScoreKind::kCrpsCm;
  std::vector<CaseKey> case_keys;
  std::vector<double> values;

  double mean() const;
};

struct RankHistogram {
  explicit RankHistogram(int n_bins) : counts(static_cast<std::size_t>(n_bins), 0) {}
  void add(int rank) { ++counts[static_cast<std::size_t>(rank - 1)]; }
  long long total() const;
  std::vector<long long> counts;
};

/// CRPS of a transformed-space predictive mixture against an observation on
/// the original scale: quadrature of the squared-CDF integrals in original
/// units with the transform applied inside the integrand.  Relative tolerance
/// 1e-7; observations outside the physical bounds add the linear penalty.
double crps_backtransformed(const TruncatedNormalMixture& forecast,
                            double lambda, double y_cm);

/// CRPS of the empirical ensemble CDF, in the exact rank-based form.
double crps_ensemble(std::span<const double> members, double y);

/// Skill of mean scores: 1 - mean(score)/mean(reference).
double crpss(const ScoreSeries& score, const ScoreSeries& reference);

double mae(std::span<const double> point_forecasts,
           std::span<const double> observations);

/// Median of an ensemble; even sizes take the midpoint of the central pair.
double ensemble_median(std::span<const double> members);

struct IntervalResult {
  bool hit = false;
  double width = 0.0;
};

/// Central (1-alpha) interval of the predictive distribution evaluated on the
/// original scale: quantiles are back-transformed before the comparison.
IntervalResult interval_coverage_width(const TruncatedNormalMixture& forecast,
                                       double alpha, double lambda,
                                       double y_cm);

/// Central interval of the raw ensemble at its matched nominal level
/// (M-1)/(M+1): the ensemble range.
IntervalResult raw_interval(std::span<const double> members_cm, double y_cm);

/// Probability integral transform: predictive CDF at the observation, both in
/// transformed space (the monotone transform leaves the PIT unchanged).
double pit(const TruncatedNormalMixture& forecast, double x);

/// Rank of the observation in the pooled set {members, observation}, in
/// 1..M+1; ties broken uniformly at random.
int verification_rank(std::span<const double> members, double x, Rng& rng);

/// Randomized PIT of a raw ensemble: (rank - U)/(M+1), uniform under
/// exchangeability.  Makes rank histograms comparable to PIT-based tests.
double rank_pit(std::span<const double> members, double x, Rng& rng);

struct DmResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Diebold-Mariano test on the loss differential of two aligned series.  The
/// variance uses a rectangular autocovariance sum with lags 0..h-1 where h is
/// the forecast horizon in whole days, matching the h-step-ahead dependence
/// of daily issue times.
DmResult dm_test(const ScoreSeries& a, const ScoreSeries& b, int horizon_h);

/// One-sample Kolmogorov-Smirnov statistic against Uniform[0,1].
double ks_statistic_uniform(std::span<const double> values);

/// Asymptotic p-value from the Kolmogorov distribution.
double ks_p_value(std::size_t n, double statistic);

/// Mean KS p-value over seeded random subsamples drawn without replacement.
double ks_uniformity_subsampled(std::span<const double> pits, int n_samples,
                                int sample_size, std::uint64_t seed);

std::vector<long long> pit_histogram(std::span<const double> pits, int n_bins);

} // namespace enscal
