#include "enscal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "enscal/dates.hpp"

namespace enscal {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

[[noreturn]] void fail(const std::string& file, std::size_t line, int column,
                       const std::string& what) {
  throw DataError(file + ":" + std::to_string(line) + ":" +
                  std::to_string(column) + ": " + what);
}

double parse_value(const std::string& file, std::size_t line, int column,
                   const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size() || !std::isfinite(v)) {
      fail(file, line, column, "not a finite number: '" + text + "'");
    }
    return v;
  } catch (const DataError&) {
    throw;
  } catch (const std::exception&) {
    fail(file, line, column, "not a number: '" + text + "'");
  }
}

int parse_int(const std::string& file, std::size_t line, int column,
              const std::string& text) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(text, &pos);
    if (pos != text.size()) {
      fail(file, line, column, "not an integer: '" + text + "'");
    }
    return v;
  } catch (const DataError&) {
    throw;
  } catch (const std::exception&) {
    fail(file, line, column, "not an integer: '" + text + "'");
  }
}

long parse_day(const std::string& file, std::size_t line, int column,
               const std::string& text) {
  try {
    return parse_date(text);
  } catch (const std::exception& e) {
    fail(file, line, column, e.what());
  }
}

} // namespace

void Dataset::set_physical_bounds(double lower_cm, double upper_cm) {
  lower_cm_ = lower_cm;
  upper_cm_ = upper_cm;
}

void Dataset::add_case(ForecastCase fc) {
  validate_case_shape(fc, spec_);
  const std::pair<long, int> key{fc.case_day, fc.lead_time_h};
  if (!cases_.emplace(key, std::move(fc)).second) {
    throw DataError("duplicate case for " + format_date(key.first) + " lead " +
                    std::to_string(key.second) + "h");
  }
  if (!std::binary_search(issue_days_.begin(), issue_days_.end(), key.first)) {
    issue_days_.insert(
        std::upper_bound(issue_days_.begin(), issue_days_.end(), key.first),
        key.first);
  }
  if (!std::binary_search(lead_times_.begin(), lead_times_.end(), key.second)) {
    lead_times_.insert(
        std::upper_bound(lead_times_.begin(), lead_times_.end(), key.second),
        key.second);
  }
}

const ForecastCase* Dataset::find(long day, int lead_time_h) const {
  const auto it = cases_.find({day, lead_time_h});
  return it == cases_.end() ? nullptr : &it->second;
}

std::pair<double, double> Dataset::observation_range() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& [key, fc] : cases_) {
    lo = std::min(lo, fc.observation);
    hi = std::max(hi, fc.observation);
  }
  return {lo, hi};
}

LoadResult load_dataset(const std::string& forecast_file,
                        const std::string& observation_file,
                        const GroupSpec& spec) {
  std::ifstream ffc(forecast_file);
  if (!ffc) throw DataError("cannot open forecast file: " + forecast_file);
  std::ifstream fobs(observation_file);
  if (!fobs) throw DataError("cannot open observation file: " + observation_file);

  // member values per (day, lead): [group][member], NaN marks "missing".
  std::map<std::pair<long, int>, std::vector<std::vector<double>>> members;
  std::string line;
  std::size_t line_no = 0;
  std::getline(ffc, line);
  ++line_no;
  if (split_csv_line(line) !=
      std::vector<std::string>{"date", "lead_time_h", "group", "member_index",
                               "value_cm"}) {
    fail(forecast_file, line_no, 1,
         "expected header date,lead_time_h,group,member_index,value_cm");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  while (std::getline(ffc, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 5) {
      fail(forecast_file, line_no, 1, "expected 5 fields");
    }
    const long day = parse_day(forecast_file, line_no, 1, fields[0]);
    const int lead = parse_int(forecast_file, line_no, 2, fields[1]);
    if (lead < 1) fail(forecast_file, line_no, 2, "lead_time_h must be >= 1");
    const int group = spec.index_of(fields[2]);
    if (group < 0) fail(forecast_file, line_no, 3, "unknown group '" + fields[2] + "'");
    const int member = parse_int(forecast_file, line_no, 4, fields[3]);
    if (member < 1 || member > spec.group_size(group)) {
      fail(forecast_file, line_no, 4,
           "member_index out of range for group " + fields[2]);
    }
    const double value = parse_value(forecast_file, line_no, 5, fields[4]);
    if (!(value > 0.0)) {
      fail(forecast_file, line_no, 5, "value_cm must be positive");
    }
    auto& slot = members[{day, lead}];
    if (slot.empty()) {
      slot.resize(static_cast<std::size_t>(spec.group_count()));
      for (int k = 0; k < spec.group_count(); ++k) {
        slot[static_cast<std::size_t>(k)].assign(
            static_cast<std::size_t>(spec.group_size(k)), nan);
      }
    }
    double& cell =
        slot[static_cast<std::size_t>(group)][static_cast<std::size_t>(member - 1)];
    if (!std::isnan(cell)) {
      fail(forecast_file, line_no, 4, "duplicate member row");
    }
    cell = value;
  }

  std::map<std::pair<long, int>, double> observations;
  line_no = 0;
  std::getline(fobs, line);
  ++line_no;
  if (split_csv_line(line) !=
      std::vector<std::string>{"date", "lead_time_h", "value_cm"}) {
    fail(observation_file, line_no, 1,
         "expected header date,lead_time_h,value_cm");
  }
  while (std::getline(fobs, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      fail(observation_file, line_no, 1, "expected 3 fields");
    }
    const long day = parse_day(observation_file, line_no, 1, fields[0]);
    const int lead = parse_int(observation_file, line_no, 2, fields[1]);
    const double value = parse_value(observation_file, line_no, 3, fields[2]);
    if (!(value > 0.0)) {
      fail(observation_file, line_no, 3, "value_cm must be positive");
    }
    if (!observations.emplace(std::pair{day, lead}, value).second) {
      throw DataError(observation_file + ":" + std::to_string(line_no) +
                      ": duplicate observation for " + fields[0] + " lead " +
                      fields[1] + "h");
    }
  }

  LoadResult out;
  out.dataset = Dataset(spec, 0.0, 0.0);
  for (auto& [key, slot] : members) {
    bool complete = true;
    for (const auto& g : slot) {
      for (double v : g) {
        if (std::isnan(v)) complete = false;
      }
    }
    if (!complete) {
      out.exclusions.push_back({"forecast", key.first, key.second,
                                "incomplete ensemble"});
      continue;
    }
    const auto obs_it = observations.find(key);
    if (obs_it == observations.end()) {
      out.exclusions.push_back({"observation", key.first, key.second,
                                "missing observation"});
      continue;
    }
    ForecastCase fc;
    fc.case_day = key.first;
    fc.lead_time_h = key.second;
    fc.members = std::move(slot);
    fc.observation = obs_it->second;
    out.dataset.add_case(std::move(fc));
  }
  for (const auto& [key, value] : observations) {
    if (members.find(key) == members.end()) {
      out.exclusions.push_back({"observation", key.first, key.second,
                                "no matching forecast"});
    }
  }
  return out;
}

void save_dataset(const Dataset& ds, const std::string& forecast_file,
                  const std::string& observation_file) {
  std::ofstream ffc(forecast_file);
  if (!ffc) throw DataError("cannot write forecast file: " + forecast_file);
  std::ofstream fobs(observation_file);
  if (!fobs) throw DataError("cannot write observation file: " + observation_file);
  ffc << "date,lead_time_h,group,member_index,value_cm\n";
  fobs << "date,lead_time_h,value_cm\n";
  ffc.precision(10);
  fobs.precision(10);
  const GroupSpec& spec = ds.group_spec();
  for (const auto& [key, fc] : ds.cases()) {
    const std::string date = format_date(key.first);
    for (int k = 0; k < spec.group_count(); ++k) {
      const auto& g = fc.members[static_cast<std::size_t>(k)];
      for (std::size_t l = 0; l < g.size(); ++l) {
        ffc << date << ',' << key.second << ',' << spec.group_name(k) << ','
            << (l + 1) << ',' << g[l] << '\n';
      }
    }
    fobs << date << ',' << key.second << ',' << fc.observation << '\n';
  }
}

std::vector<Window> rolling_windows(const Dataset& ds, int window_days) {
  std::vector<Window> out;
  const auto& days = ds.issue_days();
  if (days.empty()) return out;
  const long first = days.front();
  for (long target : days) {
    if (target - first < window_days) continue;
    Window w;
    w.target_day = target;
    const auto lo = std::lower_bound(days.begin(), days.end(),
                                     target - window_days);
    for (auto it = lo; it != days.end() && *it < target; ++it) {
      w.training_days.push_back(*it);
    }
    out.push_back(std::move(w));
  }
  return out;
}

} // namespace enscal
