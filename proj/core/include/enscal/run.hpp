#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "enscal/bma.hpp"
#include "enscal/boxcox.hpp"
#include "enscal/dataset.hpp"
#include "enscal/emos.hpp"

namespace enscal {

struct RunConfig {
  int window_days = 100;
  std::vector<std::string> models = {"bma_pure_ml", "bma_simplified",
                                     "bma_naive", "emos"};
  /// Physical bounds: explicit values, or the half-minimum / double-maximum
  /// of the recorded observations when not set.
  bool explicit_bounds = false;
  double lower_cm = 0.0;
  double upper_cm = 0.0;
  LambdaGrid lambda_grid;
  bool refit_lambda = false; // refit lambda for every window, not just the first
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output_dir;
  double presence_fraction = 0.9; // minimum share of window days with cases
  BmaControls bma_controls;
  EmosControls emos_controls;
};

struct RunSummary {
  int exit_code = 0; // 0 complete, 3 partial (skips/failures in manifest)
  int fits_total = 0;
  int fits_done = 0;
  int fits_skipped = 0;
  std::string output_dir;
};

/// Full batch run: per lead time, fit the Box-Cox coefficient, roll the
/// training window over the record, fit every requested model, predict the
/// target day, and emit model documents, score tables, histogram tables, a
/// manifest, and the exclusion report under output_dir.
RunSummary run_calibration(const Dataset& ds, const RunConfig& cfg,
                           const std::vector<Exclusion>& load_exclusions = {});

/// Re-verification of existing model documents against a dataset: reads every
/// document under models_dir, rebuilds the predictive distributions, and
/// emits the same score tables into cfg.output_dir.
RunSummary run_scoring(const std::string& models_dir, const Dataset& ds,
                       const RunConfig& cfg);

} // namespace enscal
