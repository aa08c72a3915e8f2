#include "enscal/emos.hpp"

#include <cmath>
#include <stdexcept>

#include "enscal/nelder_mead.hpp"

namespace enscal {

namespace {

double sigma_floor(double lower, double upper) {
  const double range = upper - lower;
  return std::isfinite(range) ? 1e-6 * range : 1e-9;
}

double predict_sigma(double b0, double b1, double s2, double floor,
                     bool* floored = nullptr) {
  const double var = b0 + b1 * s2;
  if (var < floor * floor) {
    if (floored) *floored = true;
    return floor;
  }
  return std::sqrt(var);
}

} // namespace

EmosFeatures emos_features(const ForecastCase& fc, const GroupSpec& spec) {
  validate_case_shape(fc, spec);
  EmosFeatures out;
  out.group_means.resize(static_cast<std::size_t>(spec.group_count()));
  double total_sum = 0.0;
  const int total = spec.total_members();
  for (int k = 0; k < spec.group_count(); ++k) {
    const auto& g = fc.members[static_cast<std::size_t>(k)];
    double s = 0.0;
    for (double v : g) s += v;
    out.group_means[static_cast<std::size_t>(k)] =
        s / static_cast<double>(g.size());
    total_sum += s;
  }
  if (total < 2) {
    out.ensemble_variance = 0.0;
    out.single_member = true;
    return out;
  }
  const double mean = total_sum / static_cast<double>(total);
  double ss = 0.0;
  for (const auto& g : fc.members) {
    for (double v : g) ss += (v - mean) * (v - mean);
  }
  out.ensemble_variance = ss / static_cast<double>(total - 1);
  return out;
}

TruncatedNormal emos_predict(const EmosModel& model, const ForecastCase& fc) {
  const EmosFeatures feat = emos_features(fc, model.group_spec);
  double mu = model.a[0];
  for (int k = 0; k < model.group_spec.group_count(); ++k) {
    mu += model.a[static_cast<std::size_t>(k + 1)] *
          feat.group_means[static_cast<std::size_t>(k)];
  }
  const double sigma =
      predict_sigma(model.b0, model.b1, feat.ensemble_variance,
                    sigma_floor(model.lower, model.upper));
  return TruncatedNormal(mu, sigma, model.lower, model.upper);
}

EmosModel emos_fit(std::span<const ForecastCase> training,
                   const GroupSpec& spec, double lower, double upper,
                   const EmosControls& controls) {
  if (training.size() < 2) {
    throw std::invalid_argument("emos_fit: needs at least 2 training cases");
  }
  const int n_groups = spec.group_count();
  const std::size_t n_params = static_cast<std::size_t>(n_groups) + 3;

  struct Row {
    std::vector<double> means;
    double s2;
    double obs;
  };
  std::vector<Row> rows;
  rows.reserve(training.size());
  for (const auto& fc : training) {
    const EmosFeatures feat = emos_features(fc, spec);
    rows.push_back({feat.group_means, feat.ensemble_variance, fc.observation});
  }

  const double floor = sigma_floor(lower, upper);
  bool floored = false;
  const auto objective = [&](const std::vector<double>& theta) {
    const double b0 = theta[n_params - 2] * theta[n_params - 2];
    const double b1 = theta[n_params - 1] * theta[n_params - 1];
    double total = 0.0;
    for (const Row& row : rows) {
      double mu = theta[0];
      for (int k = 0; k < n_groups; ++k) {
        mu += theta[static_cast<std::size_t>(k + 1)] *
              row.means[static_cast<std::size_t>(k)];
      }
      const double sigma = predict_sigma(b0, b1, row.s2, floor, &floored);
      total += TruncatedNormal(mu, sigma, lower, upper).crps(row.obs);
    }
    return total / static_cast<double>(rows.size());
  };

  // Start from the pooled ensemble mean with unit variance slope.
  std::vector<double> theta0(n_params, 0.0);
  const double total_members = static_cast<double>(spec.total_members());
  for (int k = 0; k < n_groups; ++k) {
    theta0[static_cast<std::size_t>(k + 1)] =
        static_cast<double>(spec.group_size(k)) / total_members;
  }
  double resid_ss = 0.0;
  for (const Row& row : rows) {
    double m = 0.0;
    for (int k = 0; k < n_groups; ++k) {
      m += theta0[static_cast<std::size_t>(k + 1)] *
           row.means[static_cast<std::size_t>(k)];
    }
    resid_ss += (row.obs - m) * (row.obs - m);
  }
  const double resid_var = resid_ss / static_cast<double>(rows.size());
  theta0[n_params - 2] = std::sqrt(std::max(resid_var, 1e-8));
  theta0[n_params - 1] = 1.0;

  std::vector<double> steps(n_params);
  for (std::size_t i = 0; i < n_params; ++i) {
    steps[i] = 0.2 * std::fabs(theta0[i]) + 0.05;
  }

  NelderMeadOptions opts;
  opts.f_tolerance = controls.f_tolerance;
  opts.max_evaluations = controls.max_evaluations;
  opts.restarts = controls.restarts;
  const NelderMeadResult res = nelder_mead(objective, theta0, steps, opts);

  EmosModel model;
  model.group_spec = spec;
  model.lower = lower;
  model.upper = upper;
  model.a.assign(res.x.begin(), res.x.end() - 2);
  model.b0 = res.x[n_params - 2] * res.x[n_params - 2];
  model.b1 = res.x[n_params - 1] * res.x[n_params - 1];
  model.diagnostics.evaluations = res.evaluations;
  model.diagnostics.final_mean_crps = res.f;
  model.diagnostics.converged = res.converged;
  model.diagnostics.sigma_floored = floored;
  return model;
}

} // namespace enscal
