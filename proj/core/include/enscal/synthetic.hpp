#pragma once

#include <cstdint>
#include <vector>

#include "enscal/dataset.hpp"

namespace enscal {

/// Generator settings for a synthetic water-level archive.  The latent level
/// follows a bounded AR(1) process on the transformed scale; members scatter
/// around a noisy copy of the future level, so dispersion = 1 gives a
/// calibrated (exchangeable) ensemble and dispersion < 1 an underdispersive
/// one.  Per-group biases shift entire groups.
struct SynthScenario {
  GroupSpec groups = GroupSpec::rhine_multimodel();
  int n_days = 200;
  std::vector<int> lead_times = {1, 24, 72, 120};
  long start_day = 13879; // 2008-01-01
  double lambda = 0.3;    // transform used for generation
  double lower_cm = 17.5;
  double upper_cm = 1650.0;
  double base_level_cm = 200.0;
  double process_sd = 2.2;        // stationary sd of the latent level (transformed)
  double hourly_ar = 0.995;       // hourly AR(1) coefficient
  double error_sd_base = 0.15;    // forecast error sd at lead 0 (transformed)
  double error_growth_per_h = 0.02;
  double dispersion = 0.4;        // member spread / forecast error sd
  std::vector<double> group_bias; // transformed units; empty means unbiased
};

Dataset synth_generate(const SynthScenario& scenario, std::uint64_t seed);

} // namespace enscal
