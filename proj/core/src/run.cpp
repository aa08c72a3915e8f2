#include "enscal/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "enscal/dates.hpp"
#include "enscal/model_io.hpp"
#include "enscal/rng.hpp"
#include "enscal/verification.hpp"

namespace enscal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kRankTag = 0x52414e4b; // per-case tie-break streams
constexpr std::uint64_t kKsTag = 0x4b535542;   // per-series subsampling streams

struct CaseScores {
  CaseKey key;
  double crps_cm = 0.0;
  double abs_err_cm = 0.0;
  double pit = 0.0;
  double hit = 0.0;
  double width_cm = 0.0;
};

// model name -> per-case scores, plus the raw-ensemble scores, for one run.
struct ScoreTable {
  std::map<std::string, std::vector<CaseScores>> by_model;
  std::vector<CaseScores> raw;
};

struct FitTask {
  int lead = 0;
  long target_day = 0;
  double lambda = 0.0;
  std::vector<const ForecastCase*> training;
  const ForecastCase* target = nullptr;
};

struct TaskOutput {
  int lead = 0;
  long target_day = 0;
  bool skipped = false;
  std::string skip_reason;
  long clamped_values = 0;
  std::vector<ModelDocument> documents;
  std::vector<std::pair<std::string, CaseScores>> model_scores;
  CaseScores raw_scores;
  bool has_raw = false;
  std::vector<std::string> warnings;
};

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  pool.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

ForecastCase transform_case(const ForecastCase& fc, double lambda, double lo_t,
                            double hi_t, long* clamped) {
  const double eps = 1e-9 * (hi_t - lo_t);
  const auto clamp_t = [&](double v_cm) {
    const double t = bc_transform(v_cm, lambda);
    const double c = std::clamp(t, lo_t + eps, hi_t - eps);
    if (c != t) ++*clamped;
    return c;
  };
  ForecastCase out;
  out.case_day = fc.case_day;
  out.lead_time_h = fc.lead_time_h;
  out.observation = clamp_t(fc.observation);
  out.members.resize(fc.members.size());
  for (std::size_t k = 0; k < fc.members.size(); ++k) {
    out.members[k].reserve(fc.members[k].size());
    for (double v : fc.members[k]) out.members[k].push_back(clamp_t(v));
  }
  return out;
}

CaseScores score_prediction(const TruncatedNormalMixture& mix, double lambda,
                            double y_cm, double obs_t, double alpha_level,
                            CaseKey key) {
  CaseScores s;
  s.key = key;
  s.crps_cm = crps_backtransformed(mix, lambda, y_cm);
  s.abs_err_cm = std::fabs(bc_inverse(mix.quantile(0.5), lambda) - y_cm);
  s.pit = pit(mix, obs_t);
  const IntervalResult iv = interval_coverage_width(mix, alpha_level, lambda, y_cm);
  s.hit = iv.hit ? 1.0 : 0.0;
  s.width_cm = iv.width;
  return s;
}

std::vector<double> flatten_members(const ForecastCase& fc) {
  std::vector<double> all;
  for (const auto& g : fc.members) all.insert(all.end(), g.begin(), g.end());
  return all;
}

CaseScores score_raw(const ForecastCase& fc_cm, std::uint64_t master_seed) {
  const std::vector<double> members = flatten_members(fc_cm);
  const double y = fc_cm.observation;
  CaseScores s;
  s.key = {fc_cm.case_day, fc_cm.lead_time_h};
  s.crps_cm = crps_ensemble(members, y);
  s.abs_err_cm = std::fabs(ensemble_median(members) - y);
  Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(fc_cm.case_day),
                      static_cast<std::uint64_t>(fc_cm.lead_time_h), kRankTag));
  s.pit = rank_pit(members, y, rng);
  const IntervalResult iv = raw_interval(members, y);
  s.hit = iv.hit ? 1.0 : 0.0;
  s.width_cm = iv.width;
  return s;
}

// Shared join policy: a case enters the score tables only if every model and
// the raw ensemble scored it.
std::vector<CaseKey> joint_keys(const ScoreTable& table, int lead) {
  std::map<std::pair<long, int>, int> counts;
  int series = 0;
  for (const auto& [model, scores] : table.by_model) {
    ++series;
    for (const auto& s : scores) {
      if (s.key.lead_time_h == lead) ++counts[{s.key.day, s.key.lead_time_h}];
    }
  }
  ++series;
  for (const auto& s : table.raw) {
    if (s.key.lead_time_h == lead) ++counts[{s.key.day, s.key.lead_time_h}];
  }
  std::vector<CaseKey> keys;
  for (const auto& [key, n] : counts) {
    if (n == series) keys.push_back({key.first, key.second});
  }
  return keys;
}

struct SeriesBundle {
  ScoreSeries crps, abs_err, pits, hits, widths;
};

SeriesBundle bundle_for(const std::vector<CaseScores>& scores,
                        const std::vector<CaseKey>& keys) {
  std::map<std::pair<long, int>, const CaseScores*> index;
  for (const auto& s : scores) {
    index[{s.key.day, s.key.lead_time_h}] = &s;
  }
  SeriesBundle b;
  b.crps.kind = ScoreKind::kCrpsCm;
  b.abs_err.kind = ScoreKind::kAbsErrCm;
  b.pits.kind = ScoreKind::kPit;
  b.hits.kind = ScoreKind::kIntervalHit;
  b.widths.kind = ScoreKind::kIntervalWidthCm;
  for (const CaseKey& key : keys) {
    const CaseScores* s = index.at({key.day, key.lead_time_h});
    for (ScoreSeries* series :
         {&b.crps, &b.abs_err, &b.pits, &b.hits, &b.widths}) {
      series->case_keys.push_back(key);
    }
    b.crps.values.push_back(s->crps_cm);
    b.abs_err.values.push_back(s->abs_err_cm);
    b.pits.values.push_back(s->pit);
    b.hits.values.push_back(s->hit);
    b.widths.values.push_back(s->width_cm);
  }
  return b;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

void write_score_tables(const fs::path& out_dir, const ScoreTable& table,
                        const std::vector<int>& leads, int ensemble_size,
                        std::uint64_t seed) {
  fs::create_directories(out_dir / "scores");
  std::ofstream scores(out_dir / "scores" / "scores.csv");
  scores << "lead_time_h,model,n_cases,mean_crps_cm,crpss_vs_raw,mae_cm,"
            "coverage,avg_width_cm,dm_p_vs_emos,ks_mean_p\n";
  std::ofstream pit_csv(out_dir / "scores" / "pit_histograms.csv");
  pit_csv << "lead_time_h,model,bin,count\n";
  std::ofstream rank_csv(out_dir / "scores" / "rank_histogram.csv");
  rank_csv << "lead_time_h,bin,count\n";

  std::vector<std::string> model_names;
  for (const auto& [name, scores_vec] : table.by_model) model_names.push_back(name);

  for (int lead : leads) {
    const std::vector<CaseKey> keys = joint_keys(table, lead);
    if (keys.empty()) continue;
    const SeriesBundle raw = bundle_for(table.raw, keys);
    std::map<std::string, SeriesBundle> bundles;
    for (const auto& name : model_names) {
      bundles.emplace(name, bundle_for(table.by_model.at(name), keys));
    }
    const bool have_emos = bundles.count("emos") > 0;
    const std::size_t n = keys.size();

    const auto emit_row = [&](const std::string& name, const SeriesBundle& b,
                              bool is_raw, int model_index) {
      const double mean_crps = b.crps.mean();
      const double skill = is_raw ? 0.0 : crpss(b.crps, raw.crps);
      const double mae_v = b.abs_err.mean();
      const double coverage = b.hits.mean();
      const double width = b.widths.mean();
      std::string dm_p = "";
      if (have_emos && !(!is_raw && name == "emos") && n >= 30) {
        dm_p = fmt(dm_test(b.crps, bundles.at("emos").crps, lead).p_value);
      } else if (name == "emos") {
        dm_p = "1";
      }
      std::string ks = "";
      if (n >= 30) {
        const int sample_size =
            std::min<int>(1000, std::max<int>(30, static_cast<int>(4 * n / 5)));
        ks = fmt(ks_uniformity_subsampled(
            b.pits.values, 1000, sample_size,
            derive_seed(seed, static_cast<std::uint64_t>(lead),
                        static_cast<std::uint64_t>(model_index), kKsTag)));
      }
      scores << lead << ',' << name << ',' << n << ',' << fmt(mean_crps) << ','
             << fmt(skill) << ',' << fmt(mae_v) << ',' << fmt(coverage) << ','
             << fmt(width) << ',' << dm_p << ',' << ks << '\n';
      // 20-bin PIT histograms; the raw row uses randomized rank PITs.
      const auto hist = pit_histogram(b.pits.values, 20);
      for (std::size_t bin = 0; bin < hist.size(); ++bin) {
        pit_csv << lead << ',' << name << ',' << (bin + 1) << ',' << hist[bin]
                << '\n';
      }
    };

    emit_row("raw", raw, true, 0);
    int model_index = 1;
    for (const auto& name : model_names) {
      emit_row(name, bundles.at(name), false, model_index++);
    }

    // Verification rank histogram of the raw ensemble, rebuilt from the
    // randomized rank PITs ((rank - U)/(M+1) recovers the bin).
    RankHistogram rh(ensemble_size + 1);
    for (double p : raw.pits.values) {
      int rank = static_cast<int>(std::floor(p * (ensemble_size + 1))) + 1;
      rank = std::clamp(rank, 1, ensemble_size + 1);
      rh.add(rank);
    }
    for (std::size_t bin = 0; bin < rh.counts.size(); ++bin) {
      rank_csv << lead << ',' << (bin + 1) << ',' << rh.counts[bin] << '\n';
    }
  }
}

void write_exclusions(const fs::path& out_dir,
                      const std::vector<Exclusion>& exclusions) {
  std::ofstream out(out_dir / "exclusions.csv");
  out << "source,date,lead_time_h,reason\n";
  for (const auto& e : exclusions) {
    out << e.source << ',' << format_date(e.day) << ',' << e.lead_time_h << ','
        << e.reason << '\n';
  }
}

} // namespace

RunSummary run_calibration(const Dataset& ds, const RunConfig& cfg,
                           const std::vector<Exclusion>& load_exclusions) {
  if (cfg.window_days < 30) {
    throw std::invalid_argument("run_calibration: window_days must be >= 30");
  }
  if (cfg.output_dir.empty()) {
    throw std::invalid_argument("run_calibration: output_dir is required");
  }
  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);

  double lower_cm = cfg.lower_cm;
  double upper_cm = cfg.upper_cm;
  if (!cfg.explicit_bounds) {
    const auto [obs_lo, obs_hi] = ds.observation_range();
    lower_cm = 0.5 * obs_lo;
    upper_cm = 2.0 * obs_hi;
  }
  if (!(lower_cm > 0.0) || !(lower_cm < upper_cm)) {
    throw DataError("run_calibration: invalid physical bounds");
  }

  const std::vector<Window> windows = rolling_windows(ds, cfg.window_days);
  const int min_cases = std::max(
      2, static_cast<int>(std::ceil(cfg.presence_fraction * cfg.window_days)));

  // Per-lead Box-Cox coefficient from the first adequate window, unless the
  // configuration asks for a refit per window.
  std::map<int, double> lambda_by_lead;
  std::vector<std::string> lambda_warnings;
  for (int lead : ds.lead_times()) {
    for (const Window& w : windows) {
      std::vector<double> obs;
      for (long day : w.training_days) {
        if (const ForecastCase* fc = ds.find(day, lead)) {
          obs.push_back(fc->observation);
        }
      }
      if (static_cast<int>(obs.size()) >= std::max(30, min_cases)) {
        lambda_by_lead[lead] =
            bc_fit_lambda(obs, cfg.lambda_grid, lead).lambda;
        break;
      }
    }
    if (lambda_by_lead.find(lead) == lambda_by_lead.end()) {
      lambda_warnings.push_back("lead " + std::to_string(lead) +
                                "h: no window with enough cases to fit lambda");
    }
  }

  // Assemble the task list in deterministic (lead, target) order.
  std::vector<FitTask> tasks;
  std::vector<TaskOutput> pre_skipped;
  for (int lead : ds.lead_times()) {
    const auto lam_it = lambda_by_lead.find(lead);
    if (lam_it == lambda_by_lead.end()) {
      for (const Window& w : windows) {
        TaskOutput s;
        s.lead = lead;
        s.target_day = w.target_day;
        s.skipped = true;
        s.skip_reason = "no lambda for this lead time";
        pre_skipped.push_back(std::move(s));
      }
      continue;
    }
    for (const Window& w : windows) {
      FitTask task;
      task.lead = lead;
      task.target_day = w.target_day;
      task.lambda = lam_it->second;
      for (long day : w.training_days) {
        if (const ForecastCase* fc = ds.find(day, lead)) {
          task.training.push_back(fc);
        }
      }
      task.target = ds.find(w.target_day, lead);
      if (static_cast<int>(task.training.size()) < min_cases) {
        TaskOutput s;
        s.lead = lead;
        s.target_day = w.target_day;
        s.skipped = true;
        s.skip_reason = "training presence below " +
                        std::to_string(min_cases) + " cases";
        pre_skipped.push_back(std::move(s));
        continue;
      }
      if (task.target == nullptr) {
        TaskOutput s;
        s.lead = lead;
        s.target_day = w.target_day;
        s.skipped = true;
        s.skip_reason = "no target case";
        pre_skipped.push_back(std::move(s));
        continue;
      }
      tasks.push_back(std::move(task));
    }
  }

  std::vector<TaskOutput> outputs(tasks.size());
  parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
    const FitTask& task = tasks[i];
    TaskOutput& out = outputs[i];
    out.lead = task.lead;
    out.target_day = task.target_day;
    try {
      double lambda = task.lambda;
      if (cfg.refit_lambda) {
        std::vector<double> obs;
        obs.reserve(task.training.size());
        for (const ForecastCase* fc : task.training) obs.push_back(fc->observation);
        lambda = bc_fit_lambda(obs, cfg.lambda_grid, task.lead).lambda;
      }
      const double lo_t = bc_transform(lower_cm, lambda);
      const double hi_t = bc_transform(upper_cm, lambda);
      std::vector<ForecastCase> training;
      training.reserve(task.training.size());
      for (const ForecastCase* fc : task.training) {
        training.push_back(
            transform_case(*fc, lambda, lo_t, hi_t, &out.clamped_values));
      }
      const ForecastCase target_t =
          transform_case(*task.target, lambda, lo_t, hi_t, &out.clamped_values);
      const double y_cm = task.target->observation;
      const int total_members = ds.group_spec().total_members();
      const double alpha_level = 2.0 / (total_members + 1);
      const CaseKey key{task.target_day, task.lead};

      out.raw_scores = score_raw(*task.target, cfg.seed);
      out.has_raw = true;

      for (const std::string& name : cfg.models) {
        try {
          if (name == "emos") {
            const EmosModel model = emos_fit(training, ds.group_spec(), lo_t,
                                             hi_t, cfg.emos_controls);
            out.documents.push_back(make_document(model, task.target_day,
                                                  task.lead, lambda, lower_cm,
                                                  upper_cm));
            const TruncatedNormal tn = emos_predict(model, target_t);
            const TruncatedNormalMixture mix({tn}, {1.0});
            out.model_scores.emplace_back(
                name, score_prediction(mix, lambda, y_cm, target_t.observation,
                                       alpha_level, key));
          } else if (name.rfind("bma_", 0) == 0) {
            const BmaVariant variant = bma_variant_from_string(name.substr(4));
            const BmaModel model =
                bma_fit(training, ds.group_spec(), lo_t, hi_t, variant,
                        cfg.bma_controls);
            out.documents.push_back(make_document(model, task.target_day,
                                                  task.lead, lambda, lower_cm,
                                                  upper_cm));
            const TruncatedNormalMixture mix = bma_predict(model, target_t);
            out.model_scores.emplace_back(
                name, score_prediction(mix, lambda, y_cm, target_t.observation,
                                       alpha_level, key));
          } else {
            out.warnings.push_back("unknown model '" + name + "'");
          }
        } catch (const std::exception& e) {
          out.warnings.push_back(name + " failed for " +
                                 format_date(task.target_day) + " lead " +
                                 std::to_string(task.lead) + "h: " + e.what());
        }
      }
    } catch (const std::exception& e) {
      out.skipped = true;
      out.skip_reason = e.what();
    }
  });

  // Collect in deterministic task order.
  ScoreTable table;
  for (const std::string& name : cfg.models) {
    if (name == "emos" || name.rfind("bma_", 0) == 0) table.by_model[name];
  }
  const fs::path models_dir = out_dir / "models";
  long total_clamped = 0;
  int fits_done = 0;
  std::vector<TaskOutput*> skipped;
  std::vector<std::string> warnings = lambda_warnings;
  for (auto& s : pre_skipped) skipped.push_back(&s);
  for (auto& out : outputs) {
    if (out.skipped) {
      skipped.push_back(&out);
      continue;
    }
    total_clamped += out.clamped_values;
    for (const auto& w : out.warnings) warnings.push_back(w);
    for (const ModelDocument& doc : out.documents) {
      const fs::path dir = models_dir / model_name(doc) /
                           ("lead_" + std::to_string(doc.lead_time_h));
      fs::create_directories(dir);
      write_document((dir / (format_date(doc.issue_day) + ".json")).string(),
                     doc);
    }
    if (out.model_scores.size() == cfg.models.size()) ++fits_done;
    for (auto& [name, cs] : out.model_scores) {
      table.by_model[name].push_back(cs);
    }
    if (out.has_raw) table.raw.push_back(out.raw_scores);
  }

  write_score_tables(out_dir, table, ds.lead_times(),
                     ds.group_spec().total_members(), cfg.seed);
  write_exclusions(out_dir, load_exclusions);

  json manifest;
  manifest["schema_version"] = 1;
  manifest["config"] = {
      {"window_days", cfg.window_days},
      {"models", cfg.models},
      {"bounds_policy", cfg.explicit_bounds ? "explicit" : "halfmin_doublemax"},
      {"bounds_cm", {lower_cm, upper_cm}},
      {"lambda_grid", {cfg.lambda_grid.lo, cfg.lambda_grid.hi, cfg.lambda_grid.step}},
      {"refit_lambda", cfg.refit_lambda},
      {"seed", cfg.seed},
      {"window_presence_fraction", cfg.presence_fraction},
  };
  json lambdas = json::object();
  for (const auto& [lead, lam] : lambda_by_lead) {
    lambdas[std::to_string(lead)] = lam;
  }
  manifest["lambda_by_lead"] = lambdas;
  manifest["targets"] = {
      {"windows", windows.size()},
      {"tasks", tasks.size() + pre_skipped.size()},
      {"completed", fits_done},
      {"skipped", skipped.size()},
  };
  json skip_list = json::array();
  for (const TaskOutput* s : skipped) {
    skip_list.push_back({{"date", format_date(s->target_day)},
                         {"lead_time_h", s->lead},
                         {"reason", s->skip_reason}});
  }
  manifest["skipped"] = skip_list;
  manifest["warnings"] = warnings;
  manifest["clamped_values"] = total_clamped;
  manifest["excluded_rows"] = load_exclusions.size();
  std::ofstream mf(out_dir / "manifest.json");
  mf << manifest.dump(2) << '\n';

  RunSummary summary;
  summary.fits_total = static_cast<int>(tasks.size() + pre_skipped.size());
  summary.fits_done = fits_done;
  summary.fits_skipped = static_cast<int>(skipped.size()) +
                         (static_cast<int>(tasks.size()) - fits_done);
  summary.output_dir = cfg.output_dir;
  summary.exit_code =
      (summary.fits_skipped > 0 || !warnings.empty()) ? 3 : 0;
  return summary;
}

RunSummary run_scoring(const std::string& models_dir, const Dataset& ds,
                       const RunConfig& cfg) {
  if (cfg.output_dir.empty()) {
    throw std::invalid_argument("run_scoring: output_dir is required");
  }
  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);

  std::vector<fs::path> doc_paths;
  for (const auto& entry : fs::recursive_directory_iterator(models_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      doc_paths.push_back(entry.path());
    }
  }
  std::sort(doc_paths.begin(), doc_paths.end());

  ScoreTable table;
  std::set<std::pair<long, int>> raw_done;
  std::vector<std::string> warnings;
  int fits_done = 0, fits_skipped = 0;
  for (const fs::path& path : doc_paths) {
    try {
      const ModelDocument doc = read_document(path.string());
      const ForecastCase* fc = ds.find(doc.issue_day, doc.lead_time_h);
      if (fc == nullptr) {
        ++fits_skipped;
        warnings.push_back(path.filename().string() + ": no matching case");
        continue;
      }
      long clamped = 0;
      const ForecastCase target_t =
          transform_case(*fc, doc.lambda, doc.lower_t, doc.upper_t, &clamped);
      const double alpha_level = 2.0 / (doc.group_spec.total_members() + 1);
      const CaseKey key{doc.issue_day, doc.lead_time_h};
      TruncatedNormalMixture mix =
          doc.model_type == "bma"
              ? bma_predict(bma_from_document(doc), target_t)
              : TruncatedNormalMixture(
                    {emos_predict(emos_from_document(doc), target_t)}, {1.0});
      table.by_model[model_name(doc)].push_back(
          score_prediction(mix, doc.lambda, fc->observation,
                           target_t.observation, alpha_level, key));
      if (raw_done.insert({doc.issue_day, doc.lead_time_h}).second) {
        table.raw.push_back(score_raw(*fc, cfg.seed));
      }
      ++fits_done;
    } catch (const std::exception& e) {
      ++fits_skipped;
      warnings.push_back(path.filename().string() + ": " + std::string(e.what()));
    }
  }

  write_score_tables(out_dir, table, ds.lead_times(),
                     ds.group_spec().total_members(), cfg.seed);

  json manifest;
  manifest["schema_version"] = 1;
  manifest["mode"] = "score";
  manifest["models_dir"] = models_dir;
  manifest["documents"] = doc_paths.size();
  manifest["scored"] = fits_done;
  manifest["skipped"] = fits_skipped;
  manifest["warnings"] = warnings;
  std::ofstream mf(out_dir / "manifest.json");
  mf << manifest.dump(2) << '\n';

  RunSummary summary;
  summary.fits_total = static_cast<int>(doc_paths.size());
  summary.fits_done = fits_done;
  summary.fits_skipped = fits_skipped;
  summary.output_dir = cfg.output_dir;
  summary.exit_code = fits_skipped > 0 ? 3 : 0;
  return summary;
}

} // namespace enscal
