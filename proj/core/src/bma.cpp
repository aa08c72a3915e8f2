#include "enscal/bma.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "enscal/normal.hpp"
#include "enscal/truncated_normal.hpp"

namespace enscal {

namespace {

constexpr double kDensityFloor = 1e-300;
constexpr double kDenomFloor = 1e-12;

double component_density(double x, double mu, double sigma, double lower,
                         double upper) {
  if (x < lower || x > upper) return 0.0;
  const double z = tn_normalizer(mu, sigma, lower, upper);
  return norm_pdf((x - mu) / sigma) / sigma / z;
}

struct Ols {
  double alpha = 0.0;
  double beta = 1.0;
  bool degenerate = false;
};

// Least squares of y on x over pooled pairs; falls back to a unit-slope
// offset fit when x is (numerically) constant.
Ols pooled_ols(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx < kDenomFloor * n) {
    return {my - mx, 1.0, true};
  }
  const double beta = sxy / sxx;
  return {my - beta * mx, beta, false};
}

struct Snapshot {
  std::vector<double> weights, alpha, beta;
  double sigma = 0.0;
  std::vector<std::vector<std::vector<double>>> mu;
  double ll = 0.0;
  int iteration = 0;
};

Snapshot take_snapshot(const EmState& s, double ll) {
  return {s.weights, s.alpha, s.beta, s.sigma, s.mu, ll, s.iteration};
}

} // namespace

const char* to_string(BmaVariant v) {
  switch (v) {
    case BmaVariant::kPureMl: return "pure_ml";
    case BmaVariant::kSimplified: return "simplified";
    case BmaVariant::kNaive: return "naive";
  }
  return "?";
}

BmaVariant bma_variant_from_string(const std::string& s) {
  if (s == "pure_ml") return BmaVariant::kPureMl;
  if (s == "simplified") return BmaVariant::kSimplified;
  if (s == "naive") return BmaVariant::kNaive;
  throw std::invalid_argument("unknown BMA variant: " + s);
}

EmState bma_init(std::span<const ForecastCase> training, const GroupSpec& spec,
                 double lower, double upper) {
  if (training.size() < 2) {
    throw std::invalid_argument("bma_init: needs at least 2 training cases");
  }
  if (!(lower < upper)) {
    throw std::invalid_argument("bma_init: requires lower < upper");
  }
  EmState s;
  s.spec = spec;
  s.lower = lower;
  s.upper = upper;
  s.training.assign(training.begin(), training.end());
  for (auto& fc : s.training) {
    validate_case_shape(fc, spec);
    fc.canonicalize();
    if (!(fc.observation >= lower && fc.observation <= upper)) {
      throw std::invalid_argument(
          "bma_init: observation outside the truncation bounds; clamp first");
    }
    for (const auto& g : fc.members) {
      for (double v : g) {
        if (!std::isfinite(v) || v < lower || v > upper) {
          throw std::invalid_argument(
              "bma_init: member value outside the truncation bounds");
        }
      }
    }
  }
  const std::size_t n_cases = s.training.size();
  const int n_groups = spec.group_count();
  const int total = spec.total_members();

  // Per-group pooled regression of observations on member values.
  s.alpha.resize(static_cast<std::size_t>(n_groups));
  s.beta.resize(static_cast<std::size_t>(n_groups));
  for (int k = 0; k < n_groups; ++k) {
    std::vector<double> f, y;
    f.reserve(n_cases * static_cast<std::size_t>(spec.group_size(k)));
    y.reserve(f.capacity());
    for (const auto& fc : s.training) {
      for (double v : fc.members[static_cast<std::size_t>(k)]) {
        f.push_back(v);
        y.push_back(fc.observation);
      }
    }
    const Ols ols = pooled_ols(f, y);
    s.alpha[static_cast<std::size_t>(k)] = ols.alpha;
    s.beta[static_cast<std::size_t>(k)] = ols.beta;
    s.diag.degenerate_regression |= ols.degenerate;
  }

  double mean_obs = 0.0;
  for (const auto& fc : s.training) mean_obs += fc.observation;
  mean_obs /= static_cast<double>(n_cases);
  double ss = 0.0;
  for (const auto& fc : s.training) {
    ss += (fc.observation - mean_obs) * (fc.observation - mean_obs);
  }
  s.sigma = std::sqrt(ss / static_cast<double>(n_cases - 1));
  if (!(s.sigma > 0.0)) {
    s.sigma = std::isfinite(upper - lower) ? 1e-4 * (upper - lower) : 1e-6;
    s.diag.sigma_floored = true;
  }

  s.weights.assign(static_cast<std::size_t>(n_groups),
                   1.0 / static_cast<double>(total));

  s.mu0.resize(n_cases);
  s.z.resize(n_cases);
  for (std::size_t i = 0; i < n_cases; ++i) {
    s.mu0[i].resize(static_cast<std::size_t>(n_groups));
    s.z[i].resize(static_cast<std::size_t>(n_groups));
    for (int k = 0; k < n_groups; ++k) {
      const auto& fk = s.training[i].members[static_cast<std::size_t>(k)];
      auto& mu_row = s.mu0[i][static_cast<std::size_t>(k)];
      mu_row.resize(fk.size());
      for (std::size_t l = 0; l < fk.size(); ++l) {
        mu_row[l] = s.alpha[static_cast<std::size_t>(k)] +
                    s.beta[static_cast<std::size_t>(k)] * fk[l];
      }
      s.z[i][static_cast<std::size_t>(k)].assign(
          fk.size(), 1.0 / static_cast<double>(total));
    }
  }
  s.mu = s.mu0;
  return s;
}

void em_e_step(EmState& s) {
  const int n_groups = s.spec.group_count();
  const double uniform = 1.0 / static_cast<double>(s.spec.total_members());
  for (std::size_t i = 0; i < s.training.size(); ++i) {
    const double x = s.training[i].observation;
    double total = 0.0;
    for (int k = 0; k < n_groups; ++k) {
      const auto& mu_row = s.mu[i][static_cast<std::size_t>(k)];
      auto& z_row = s.z[i][static_cast<std::size_t>(k)];
      for (std::size_t l = 0; l < mu_row.size(); ++l) {
        const double d = s.weights[static_cast<std::size_t>(k)] *
                         component_density(x, mu_row[l], s.sigma, s.lower,
                                           s.upper);
        z_row[l] = d;
        total += d;
      }
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      for (auto& z_row : s.z[i]) {
        std::fill(z_row.begin(), z_row.end(), uniform);
      }
      s.diag.responsibilities_flagged = true;
      continue;
    }
    for (auto& z_row : s.z[i]) {
      for (double& v : z_row) v /= total;
    }
  }
}

void em_update_weights(EmState& s) {
  const int n_groups = s.spec.group_count();
  const double n = static_cast<double>(s.training.size());
  std::vector<double> mass(static_cast<std::size_t>(n_groups), 0.0);
  for (std::size_t i = 0; i < s.training.size(); ++i) {
    for (int k = 0; k < n_groups; ++k) {
      for (double zv : s.z[i][static_cast<std::size_t>(k)]) {
        mass[static_cast<std::size_t>(k)] += zv;
      }
    }
  }
  double total = 0.0;
  for (double m : mass) total += m;
  // total == n up to rounding; renormalize so member weights stay a
  // probability distribution exactly.
  const double scale = total > 0.0 ? 1.0 / total : 1.0 / n;
  for (int k = 0; k < n_groups; ++k) {
    s.weights[static_cast<std::size_t>(k)] =
        mass[static_cast<std::size_t>(k)] * scale /
        static_cast<double>(s.spec.group_size(k));
  }
}

void em_update_location(EmState& s, CorrectionAnchor anchor) {
  const int n_groups = s.spec.group_count();
  for (int k = 0; k < n_groups; ++k) {
    const std::size_t ku = static_cast<std::size_t>(k);
    const double alpha_old = s.alpha[ku];
    const double beta_old = s.beta[ku];
    double sz = 0.0, szf2 = 0.0, num_a = 0.0, num_b = 0.0;
    for (std::size_t i = 0; i < s.training.size(); ++i) {
      const double x = s.training[i].observation;
      const auto& fk = s.training[i].members[ku];
      const auto& z_row = s.z[i][ku];
      const auto& mu_row = s.mu[i][ku];
      for (std::size_t l = 0; l < fk.size(); ++l) {
        const double corr = -tn_mean_offset(mu_row[l], s.sigma, s.lower, s.upper);
        sz += z_row[l];
        szf2 += z_row[l] * fk[l] * fk[l];
        num_a += z_row[l] * ((x - beta_old * fk[l]) + corr);
        num_b += z_row[l] * fk[l] * ((x - alpha_old) + corr);
      }
    }
    if (sz < kDenomFloor || szf2 < kDenomFloor) {
      s.diag.location_update_skipped = true;
      continue;
    }
    s.alpha[ku] = num_a / sz;
    s.beta[ku] = num_b / szf2;
  }
  // Mean correction of the per-member locations at the fresh affine values.
  for (std::size_t i = 0; i < s.training.size(); ++i) {
    for (int k = 0; k < n_groups; ++k) {
      const std::size_t ku = static_cast<std::size_t>(k);
      const auto& fk = s.training[i].members[ku];
      auto& mu_row = s.mu[i][ku];
      for (std::size_t l = 0; l < fk.size(); ++l) {
        const double affine = s.alpha[ku] + s.beta[ku] * fk[l];
        const double base = anchor == CorrectionAnchor::kInitialRegression
                                ? s.mu0[i][ku][l]
                                : affine;
        mu_row[l] = base - tn_mean_offset(affine, s.sigma, s.lower, s.upper);
      }
    }
  }
}

void em_update_location_simplified(EmState& s) {
  for (std::size_t i = 0; i < s.training.size(); ++i) {
    for (std::size_t k = 0; k < s.mu[i].size(); ++k) {
      auto& mu_row = s.mu[i][k];
      for (std::size_t l = 0; l < mu_row.size(); ++l) {
        mu_row[l] = s.mu0[i][k][l] -
                    tn_mean_offset(mu_row[l], s.sigma, s.lower, s.upper);
      }
    }
  }
}

void em_update_sigma(EmState& s) {
  const double n = static_cast<double>(s.training.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.training.size(); ++i) {
    const double x = s.training[i].observation;
    for (std::size_t k = 0; k < s.z[i].size(); ++k) {
      const auto& z_row = s.z[i][k];
      const auto& mu_row = s.mu[i][k];
      for (std::size_t l = 0; l < z_row.size(); ++l) {
        const double r = x - mu_row[l];
        acc += z_row[l] *
               (r * r + tn_variance_correction(mu_row[l], s.sigma, s.lower,
                                               s.upper));
      }
    }
  }
  double s2 = acc / n;
  if (!(s2 > 0.0) || !std::isfinite(s2)) {
    const double range = s.upper - s.lower;
    s2 = std::isfinite(range) ? 1e-8 * range * range : 1e-12;
    s.diag.sigma_floored = true;
  }
  s.sigma = std::sqrt(s2);
}

double em_log_likelihood(const EmState& s) {
  double ll = 0.0;
  for (std::size_t i = 0; i < s.training.size(); ++i) {
    const double x = s.training[i].observation;
    double mix = 0.0;
    for (std::size_t k = 0; k < s.mu[i].size(); ++k) {
      for (double mu : s.mu[i][k]) {
        mix += s.weights[k] * component_density(x, mu, s.sigma, s.lower, s.upper);
      }
    }
    ll += std::log(std::max(mix, kDensityFloor));
  }
  return ll;
}

BmaModel bma_fit(std::span<const ForecastCase> training, const GroupSpec& spec,
                 double lower, double upper, BmaVariant variant,
                 const BmaControls& controls) {
  EmState s = bma_init(training, spec, lower, upper);
  double ll = em_log_likelihood(s);
  s.diag.initial_log_likelihood = ll;
  s.diag.log_likelihood_trace.push_back(ll);
  Snapshot best = take_snapshot(s, ll);

  bool converged = false;
  while (s.iteration < controls.max_iterations) {
    ++s.iteration;
    em_e_step(s);
    em_update_weights(s);
    switch (variant) {
      case BmaVariant::kPureMl:
        em_update_location(s, controls.anchor);
        break;
      case BmaVariant::kSimplified:
        em_update_location_simplified(s);
        break;
      case BmaVariant::kNaive:
        break; // locations stay at the initial regression values
    }
    em_update_sigma(s);
    const double ll_new = em_log_likelihood(s);
    s.diag.log_likelihood_trace.push_back(ll_new);
    if (ll_new >= best.ll) {
      best = take_snapshot(s, ll_new);
    }
    if (std::fabs(ll_new - ll) < controls.tolerance * std::max(std::fabs(ll_new), 1e-10)) {
      converged = true;
      ll = ll_new;
      break;
    }
    ll = ll_new;
  }

  if (!converged) {
    // Hand back the best iterate seen; callers decide how to proceed.
    s.weights = best.weights;
    s.alpha = best.alpha;
    s.beta = best.beta;
    s.sigma = best.sigma;
    s.mu = best.mu;
    ll = best.ll;
  }

  BmaModel model;
  model.group_spec = spec;
  model.lower = lower;
  model.upper = upper;
  model.variant = variant;
  model.weights = s.weights;
  model.sigma = s.sigma;
  if (variant == BmaVariant::kSimplified) {
    // Recover the affine coefficients from the final locations.
    model.alpha.resize(s.alpha.size());
    model.beta.resize(s.beta.size());
    for (int k = 0; k < spec.group_count(); ++k) {
      std::vector<double> f, m;
      for (std::size_t i = 0; i < s.training.size(); ++i) {
        const auto& fk = s.training[i].members[static_cast<std::size_t>(k)];
        const auto& mu_row = s.mu[i][static_cast<std::size_t>(k)];
        for (std::size_t l = 0; l < fk.size(); ++l) {
          f.push_back(fk[l]);
          m.push_back(mu_row[l]);
        }
      }
      const Ols ols = pooled_ols(f, m);
      model.alpha[static_cast<std::size_t>(k)] = ols.alpha;
      model.beta[static_cast<std::size_t>(k)] = ols.beta;
    }
  } else {
    model.alpha = s.alpha;
    model.beta = s.beta;
  }
  model.diagnostics = s.diag;
  model.diagnostics.iterations = s.iteration;
  model.diagnostics.final_log_likelihood = ll;
  model.diagnostics.converged = converged;
  return model;
}

TruncatedNormalMixture bma_predict(const BmaModel& model,
                                   const ForecastCase& fc) {
  validate_case_shape(fc, model.group_spec);
  ForecastCase canonical = fc;
  canonical.canonicalize();
  std::vector<TruncatedNormal> components;
  std::vector<double> weights;
  components.reserve(static_cast<std::size_t>(model.group_spec.total_members()));
  weights.reserve(components.capacity());
  for (int k = 0; k < model.group_spec.group_count(); ++k) {
    const std::size_t ku = static_cast<std::size_t>(k);
    for (double f : canonical.members[ku]) {
      components.emplace_back(model.alpha[ku] + model.beta[ku] * f, model.sigma,
                              model.lower, model.upper);
      weights.push_back(model.weights[ku]);
    }
  }
  return TruncatedNormalMixture(std::move(components), std::move(weights));
}

} // namespace enscal
