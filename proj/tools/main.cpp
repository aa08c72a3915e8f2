// enscal: calibration of bounded ensemble forecasts.
//
// Subcommands: calibrate (fit + predict + score), simulate (synthetic data),
// score (re-verify existing model documents), inspect (print a document).
// Exit codes: 0 success, 1 usage error, 2 data error, 3 partial run.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "enscal/dataset.hpp"
#include "enscal/dates.hpp"
#include "enscal/model_io.hpp"
#include "enscal/run.hpp"
#include "enscal/synthetic.hpp"

namespace {

enscal::GroupSpec parse_groups(const std::vector<std::string>& specs) {
  if (specs.empty()) return enscal::GroupSpec::rhine_multimodel();
  std::vector<enscal::GroupSpec::Group> groups;
  for (const std::string& s : specs) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) {
      throw CLI::ValidationError("--groups", "expected name:size, got '" + s + "'");
    }
    groups.push_back({s.substr(0, colon), std::stoi(s.substr(colon + 1))});
  }
  return enscal::GroupSpec(std::move(groups));
}

std::vector<int> parse_leads(const std::string& text) {
  std::vector<int> leads;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma - pos);
    const std::size_t dots = tok.find("..");
    if (dots != std::string::npos) {
      const int lo = std::stoi(tok.substr(0, dots));
      const int hi = std::stoi(tok.substr(dots + 2));
      for (int h = lo; h <= hi; ++h) leads.push_back(h);
    } else {
      leads.push_back(std::stoi(tok));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return leads;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration of bounded ensemble forecasts: truncated normal "
               "BMA and EMOS with probabilistic verification"};
  app.require_subcommand(1);

  // --- calibrate
  auto* cal = app.add_subcommand(
      "calibrate", "Fit models over rolling windows, predict, and score");
  std::string cal_forecasts, cal_observations, cal_out;
  enscal::RunConfig cfg;
  std::vector<std::string> cal_groups;
  std::vector<double> cal_bounds;
  std::vector<double> cal_grid;
  cal->add_option("--forecasts", cal_forecasts, "Forecast CSV")->required();
  cal->add_option("--observations", cal_observations, "Observation CSV")->required();
  cal->add_option("--out", cal_out, "Output directory")->required();
  cal->add_option("--window", cfg.window_days, "Rolling training window (days)")
      ->default_val(100);
  cal->add_option("--variants", cfg.models,
                  "Models: bma_pure_ml bma_simplified bma_naive emos")
      ->delimiter(',');
  cal->add_option("--bounds", cal_bounds,
                  "Explicit physical bounds lo,hi in cm (default: half of the "
                  "minimum and double of the maximum observation)")
      ->delimiter(',')
      ->expected(2);
  cal->add_option("--lambda-grid", cal_grid, "Box-Cox grid lo,hi,step")
      ->delimiter(',')
      ->expected(3);
  cal->add_flag("--refit-lambda", cfg.refit_lambda,
                "Refit lambda for every window instead of once per lead time");
  cal->add_option("--seed", cfg.seed, "Seed for randomized tie-breaking")
      ->default_val(0);
  cal->add_option("--workers", cfg.workers, "Worker threads")->default_val(1);
  cal->add_option("--groups", cal_groups,
                  "Ensemble groups as name:size,... (default hres:1,eps:51,"
                  "cosmo:16,gefs:11)")
      ->delimiter(',');

  // --- simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic archive");
  std::string sim_out, sim_leads = "1,24,72,120";
  enscal::SynthScenario scenario;
  std::uint64_t sim_seed = 0;
  std::vector<std::string> sim_groups;
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_option("--seed", sim_seed, "Generator seed")->required();
  sim->add_option("--days", scenario.n_days, "Number of issue days")
      ->default_val(200);
  sim->add_option("--lead-times", sim_leads,
                  "Lead times in hours, e.g. 1,24,72,120 or 1..120");
  sim->add_option("--lambda", scenario.lambda, "Generator transform coefficient")
      ->default_val(0.3);
  sim->add_option("--dispersion", scenario.dispersion,
                  "Member spread as a fraction of forecast error (1 = calibrated)")
      ->default_val(0.4);
  sim->add_option("--bias", scenario.group_bias,
                  "Per-group bias (transformed units)")
      ->delimiter(',');
  sim->add_option("--groups", sim_groups, "Ensemble groups as name:size,...")
      ->delimiter(',');
  std::string sim_start_date;
  sim->add_option("--start-date", sim_start_date, "First issue date (YYYY-MM-DD)");

  // --- score
  auto* sco = app.add_subcommand(
      "score", "Re-verify existing model documents against data");
  std::string sco_models, sco_forecasts, sco_observations, sco_out;
  std::uint64_t sco_seed = 0;
  std::vector<std::string> sco_groups;
  sco->add_option("--models", sco_models, "Directory of model documents")->required();
  sco->add_option("--forecasts", sco_forecasts, "Forecast CSV")->required();
  sco->add_option("--observations", sco_observations, "Observation CSV")->required();
  sco->add_option("--out", sco_out, "Output directory")->required();
  sco->add_option("--seed", sco_seed, "Seed for randomized tie-breaking")
      ->default_val(0);
  sco->add_option("--groups", sco_groups, "Ensemble groups as name:size,...")
      ->delimiter(',');

  // --- inspect
  auto* ins = app.add_subcommand("inspect", "Print a model document");
  std::string ins_path;
  ins->add_option("path", ins_path, "Model document JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); // --help
    app.exit(e);
    return 1;
  }

  try {
    if (cal->parsed()) {
      if (!cal_bounds.empty()) {
        cfg.explicit_bounds = true;
        cfg.lower_cm = cal_bounds[0];
        cfg.upper_cm = cal_bounds[1];
      }
      if (!cal_grid.empty()) {
        cfg.lambda_grid = {cal_grid[0], cal_grid[1], cal_grid[2]};
      }
      cfg.output_dir = cal_out;
      const enscal::GroupSpec spec = parse_groups(cal_groups);
      enscal::LoadResult loaded =
          enscal::load_dataset(cal_forecasts, cal_observations, spec);
      const enscal::RunSummary summary =
          enscal::run_calibration(loaded.dataset, cfg, loaded.exclusions);
      std::cout << "calibrate: " << summary.fits_done << "/"
                << summary.fits_total << " targets completed, outputs in "
                << summary.output_dir << "\n";
      return summary.exit_code;
    }
    if (sim->parsed()) {
      scenario.groups = parse_groups(sim_groups);
      scenario.lead_times = parse_leads(sim_leads);
      if (!sim_start_date.empty()) {
        scenario.start_day = enscal::parse_date(sim_start_date);
      }
      const enscal::Dataset ds = enscal::synth_generate(scenario, sim_seed);
      std::filesystem::create_directories(sim_out);
      enscal::save_dataset(ds, sim_out + "/forecasts.csv",
                           sim_out + "/observations.csv");
      std::cout << "simulate: " << ds.case_count() << " cases over "
                << ds.issue_days().size() << " days written to " << sim_out
                << "\n";
      return 0;
    }
    if (sco->parsed()) {
      enscal::RunConfig sc;
      sc.output_dir = sco_out;
      sc.seed = sco_seed;
      const enscal::GroupSpec spec = parse_groups(sco_groups);
      enscal::LoadResult loaded =
          enscal::load_dataset(sco_forecasts, sco_observations, spec);
      const enscal::RunSummary summary =
          enscal::run_scoring(sco_models, loaded.dataset, sc);
      std::cout << "score: " << summary.fits_done << "/" << summary.fits_total
                << " documents scored, outputs in " << summary.output_dir
                << "\n";
      return summary.exit_code;
    }
    if (ins->parsed()) {
      const enscal::ModelDocument doc = enscal::read_document(ins_path);
      std::cout << enscal::to_json(doc) << "\n";
      return 0;
    }
  } catch (const enscal::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
