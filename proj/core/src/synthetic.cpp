#include "enscal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "enscal/boxcox.hpp"
#include "enscal/rng.hpp"

namespace enscal {

Dataset synth_generate(const SynthScenario& sc, std::uint64_t seed) {
  if (sc.n_days < 1 || sc.lead_times.empty()) {
    throw std::invalid_argument("synth_generate: empty scenario");
  }
  if (!(sc.lower_cm > 0.0) || !(sc.lower_cm < sc.upper_cm)) {
    throw std::invalid_argument("synth_generate: invalid physical bounds");
  }
  if (!(sc.dispersion > 0.0)) {
    throw std::invalid_argument("synth_generate: dispersion must be positive");
  }
  const double a = bc_transform(sc.lower_cm, sc.lambda);
  const double b = bc_transform(sc.upper_cm, sc.lambda);
  const double m0 = bc_transform(sc.base_level_cm, sc.lambda);
  if (!(a < m0 && m0 < b) || !(sc.process_sd > 0.0) ||
      sc.process_sd > 0.25 * (b - a)) {
    throw std::invalid_argument(
        "synth_generate: infeasible scenario, latent process crosses bounds");
  }
  std::vector<double> bias(static_cast<std::size_t>(sc.groups.group_count()), 0.0);
  if (!sc.group_bias.empty()) {
    if (sc.group_bias.size() != bias.size()) {
      throw std::invalid_argument("synth_generate: bias length != group count");
    }
    bias = sc.group_bias;
  }

  const int max_lead = *std::max_element(sc.lead_times.begin(), sc.lead_times.end());
  const int n_hours = sc.n_days * 24 + max_lead + 7;
  const double margin = 1e-9 * (b - a);
  const double clip_lo = a + 0.02 * (b - a);
  const double clip_hi = b - 0.02 * (b - a);

  Rng rng(seed);
  std::vector<double> level(static_cast<std::size_t>(n_hours));
  const double innov_sd = sc.process_sd * std::sqrt(1.0 - sc.hourly_ar * sc.hourly_ar);
  double z = m0 + sc.process_sd * rng.normal();
  for (int t = 0; t < n_hours; ++t) {
    z = m0 + sc.hourly_ar * (z - m0) + innov_sd * rng.normal();
    z = std::clamp(z, clip_lo, clip_hi);
    level[static_cast<std::size_t>(t)] = z;
  }

  Dataset ds(sc.groups, sc.lower_cm, sc.upper_cm);
  const auto to_cm = [&](double v) {
    return bc_inverse(std::clamp(v, a + margin, b - margin), sc.lambda);
  };
  for (int d = 0; d < sc.n_days; ++d) {
    const int issue_hour = d * 24 + 6;
    for (int lead : sc.lead_times) {
      const double truth = level[static_cast<std::size_t>(issue_hour + lead)];
      const double err_sd = sc.error_sd_base * (1.0 + sc.error_growth_per_h * lead);
      // The ensemble sees the future level through one shared error draw;
      // members then scatter around that center.
      const double center = truth + err_sd * rng.normal();
      ForecastCase fc;
      fc.case_day = sc.start_day + d;
      fc.lead_time_h = lead;
      fc.observation = to_cm(truth);
      fc.members.resize(static_cast<std::size_t>(sc.groups.group_count()));
      for (int k = 0; k < sc.groups.group_count(); ++k) {
        auto& g = fc.members[static_cast<std::size_t>(k)];
        g.resize(static_cast<std::size_t>(sc.groups.group_size(k)));
        for (double& v : g) {
          v = to_cm(center + bias[static_cast<std::size_t>(k)] +
                    sc.dispersion * err_sd * rng.normal());
        }
      }
      ds.add_case(std::move(fc));
    }
  }
  return ds;
}

} // namespace enscal
