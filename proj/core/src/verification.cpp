#include "enscal/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "enscal/boxcox.hpp"
#include "enscal/normal.hpp"
#include "enscal/quadrature.hpp"

namespace enscal {

namespace {

void require_aligned(const ScoreSeries& a, const ScoreSeries& b) {
  if (a.values.size() != b.values.size() || a.case_keys != b.case_keys) {
    throw std::invalid_argument("score series are not aligned");
  }
}

} // namespace

double ScoreSeries::mean() const {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

long long RankHistogram::total() const {
  long long t = 0;
  for (long long c : counts) t += c;
  return t;
}

double crps_backtransformed(const TruncatedNormalMixture& forecast,
                            double lambda, double y_cm) {
  const double lo_cm = bc_inverse(forecast.lower(), lambda);
  const double hi_cm = bc_inverse(forecast.upper(), lambda);
  const double yc = std::clamp(y_cm, lo_cm, hi_cm);
  const double penalty = std::fabs(y_cm - yc);

  std::vector<double> splits;
  splits.reserve(forecast.components().size());
  for (const auto& c : forecast.components()) {
    if (c.mu() > forecast.lower() && c.mu() < forecast.upper()) {
      splits.push_back(bc_inverse(c.mu(), lambda));
    }
  }
  std::sort(splits.begin(), splits.end());

  const auto sq_cdf = [&](double u) {
    const double f = forecast.cdf(bc_transform(u, lambda));
    return f * f;
  };
  const auto sq_sf = [&](double u) {
    const double f = 1.0 - forecast.cdf(bc_transform(u, lambda));
    return f * f;
  };
  const double i1 = integrate_piecewise(sq_cdf, lo_cm, yc, splits, 1e-7);
  const double i2 = integrate_piecewise(sq_sf, yc, hi_cm, splits, 1e-7);
  return penalty + i1 + i2;
}

double crps_ensemble(std::span<const double> members, double y) {
  if (members.empty()) {
    throw std::invalid_argument("crps_ensemble: needs at least one member");
  }
  std::vector<double> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double abs_term = 0.0;
  double pair_term = 0.0; // sum over i<j of (x_(j) - x_(i)) via ranks
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    abs_term += std::fabs(sorted[i] - y);
    pair_term += (2.0 * static_cast<double>(i + 1) - 1.0 - m) * sorted[i];
  }
  return abs_term / m - pair_term / (m * m);
}

double crpss(const ScoreSeries& score, const ScoreSeries& reference) {
  require_aligned(score, reference);
  const double ref_mean = reference.mean();
  if (!(ref_mean > 0.0)) {
    throw std::invalid_argument("crpss: reference mean must be positive");
  }
  return 1.0 - score.mean() / ref_mean;
}

double mae(std::span<const double> point_forecasts,
           std::span<const double> observations) {
  if (point_forecasts.size() != observations.size() || point_forecasts.empty()) {
    throw std::invalid_argument("mae: inputs must be aligned and non-empty");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < point_forecasts.size(); ++i) {
    s += std::fabs(point_forecasts[i] - observations[i]);
  }
  return s / static_cast<double>(point_forecasts.size());
}

double ensemble_median(std::span<const double> members) {
  if (members.empty()) {
    throw std::invalid_argument("ensemble_median: empty ensemble");
  }
  std::vector<double> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

IntervalResult interval_coverage_width(const TruncatedNormalMixture& forecast,
                                       double alpha, double lambda,
                                       double y_cm) {
  const double q_lo = bc_inverse(forecast.quantile(0.5 * alpha), lambda);
  const double q_hi = bc_inverse(forecast.quantile(1.0 - 0.5 * alpha), lambda);
  return {q_lo <= y_cm && y_cm <= q_hi, q_hi - q_lo};
}

IntervalResult raw_interval(std::span<const double> members_cm, double y_cm) {
  const auto [lo_it, hi_it] =
      std::minmax_element(members_cm.begin(), members_cm.end());
  return {*lo_it <= y_cm && y_cm <= *hi_it, *hi_it - *lo_it};
}

double pit(const TruncatedNormalMixture& forecast, double x) {
  return forecast.cdf(x);
}

int verification_rank(std::span<const double> members, double x, Rng& rng) {
  int below = 0, ties = 0;
  for (double m : members) {
    if (m < x) ++below;
    else if (m == x) ++ties;
  }
  int rank = below + 1;
  if (ties > 0) {
    rank += static_cast<int>(rng.below(static_cast<std::uint64_t>(ties) + 1));
  }
  return rank;
}

double rank_pit(std::span<const double> members, double x, Rng& rng) {
  const int rank = verification_rank(members, x, rng);
  const double m1 = static_cast<double>(members.size() + 1);
  return (static_cast<double>(rank) - rng.uniform()) / m1;
}

DmResult dm_test(const ScoreSeries& a, const ScoreSeries& b, int horizon_h) {
  require_aligned(a, b);
  const std::size_t n = a.values.size();
  if (n < 30) {
    throw std::invalid_argument("dm_test: needs at least 30 aligned cases");
  }
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a.values[i] - b.values[i];
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(n);

  const int lags = std::max(1, (horizon_h + 23) / 24);
  double variance = 0.0;
  for (int l = 0; l < lags; ++l) {
    double g = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(l) < n; ++t) {
      g += (d[t] - mean) * (d[t + static_cast<std::size_t>(l)] - mean);
    }
    g /= static_cast<double>(n);
    variance += (l == 0) ? g : 2.0 * g;
  }
  if (!(variance > 0.0)) {
    // A negative rectangular sum falls back to the lag-0 term; an all-zero
    // differential is reported as "no difference".
    double g0 = 0.0;
    for (double v : d) g0 += (v - mean) * (v - mean);
    g0 /= static_cast<double>(n);
    if (!(g0 > 0.0)) return {0.0, 1.0};
    variance = g0;
  }
  const double stat = mean / std::sqrt(variance / static_cast<double>(n));
  const double p = 2.0 * norm_sf(std::fabs(stat));
  return {stat, std::min(p, 1.0)};
}

double ks_statistic_uniform(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("ks_statistic_uniform: empty sample");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double u = std::clamp(sorted[i], 0.0, 1.0);
    const double hi = static_cast<double>(i + 1) / n - u;
    const double lo = u - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  return d;
}

double ks_p_value(std::size_t n, double statistic) {
  const double lambda = std::sqrt(static_cast<double>(n)) * statistic;
  if (lambda < 0.2) return 1.0;
  double p = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    p += sign * term;
    sign = -sign;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * p, 0.0, 1.0);
}

double ks_uniformity_subsampled(std::span<const double> pits, int n_samples,
                                int sample_size, std::uint64_t seed) {
  if (static_cast<int>(pits.size()) < sample_size) {
    throw std::invalid_argument(
        "ks_uniformity_subsampled: fewer PIT values than the sample size");
  }
  Rng rng(seed);
  std::vector<std::size_t> idx(pits.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<double> sample(static_cast<std::size_t>(sample_size));
  double p_sum = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    // Partial Fisher-Yates: the first sample_size entries become the draw.
    for (int i = 0; i < sample_size; ++i) {
      const std::size_t j =
          static_cast<std::size_t>(i) +
          static_cast<std::size_t>(rng.below(idx.size() - static_cast<std::size_t>(i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
      sample[static_cast<std::size_t>(i)] = pits[idx[static_cast<std::size_t>(i)]];
    }
    p_sum += ks_p_value(sample.size(), ks_statistic_uniform(sample));
  }
  return p_sum / static_cast<double>(n_samples);
}

std::vector<long long> pit_histogram(std::span<const double> pits, int n_bins) {
  std::vector<long long> counts(static_cast<std::size_t>(n_bins), 0);
  for (double p : pits) {
    int bin = static_cast<int>(std::clamp(p, 0.0, 1.0) * n_bins);
    if (bin == n_bins) bin = n_bins - 1;
    ++counts[static_cast<std::size_t>(bin)];
  }
  return counts;
}

} // namespace enscal
