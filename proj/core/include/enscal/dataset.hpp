#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "enscal/ensemble.hpp"

namespace enscal {

/// Malformed or inconsistent input data; message carries file/line/column.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Exclusion {
  std::string source;
  long day = 0;
  int lead_time_h = 0;
  std::string reason;
};

/// Forecast-observation archive in original units (cm), indexed by issue date
/// and lead time.  Dates are serial day numbers; iteration order over cases is
/// deterministic.
class Dataset {
 public:
  Dataset() = default;
  Dataset(GroupSpec spec, double lower_cm, double upper_cm)
      : spec_(std::move(spec)), lower_cm_(lower_cm), upper_cm_(upper_cm) {}

  const GroupSpec& group_spec() const { return spec_; }
  double physical_lower_cm() const { return lower_cm_; }
  double physical_upper_cm() const { return upper_cm_; }
  void set_physical_bounds(double lower_cm, double upper_cm);

  void add_case(ForecastCase fc); // validates shape; throws on duplicates

  const std::vector<long>& issue_days() const { return issue_days_; }
  const std::vector<int>& lead_times() const { return lead_times_; }
  std::size_t case_count() const { return cases_.size(); }

  const ForecastCase* find(long day, int lead_time_h) const;

  /// Observed range over all cases (observations only).
  std::pair<double, double> observation_range() const;

  const std::map<std::pair<long, int>, ForecastCase>& cases() const {
    return cases_;
  }

 private:
  GroupSpec spec_;
  double lower_cm_ = 0.0;
  double upper_cm_ = 0.0;
  std::map<std::pair<long, int>, ForecastCase> cases_;
  std::vector<long> issue_days_; // sorted unique
  std::vector<int> lead_times_;  // sorted unique
};

struct LoadResult {
  Dataset dataset;
  std::vector<Exclusion> exclusions;
};

/// Reads the forecast CSV (date,lead_time_h,group,member_index,value_cm) and
/// observation CSV (date,lead_time_h,value_cm), validates against the group
/// spec, drops incomplete (date, lead) pairs pairwise into the exclusion
/// report, and errors (DataError) on schema violations or duplicates.
LoadResult load_dataset(const std::string& forecast_file,
                        const std::string& observation_file,
                        const GroupSpec& spec);

void save_dataset(const Dataset& ds, const std::string& forecast_file,
                  const std::string& observation_file);

struct Window {
  long target_day = 0;
  std::vector<long> training_days; // calendar days present in the dataset
};

/// Rolling calendar windows: for every issue date preceded by at least
/// window_days days of record, the immediately preceding window_days calendar
/// days that exist in the dataset.  Presence requirements are enforced
/// downstream per lead time, where the usable cases are known.
std::vector<Window> rolling_windows(const Dataset& ds, int window_days);

} // namespace enscal
