#pragma once

#include <string>
#include <vector>

namespace enscal {

/// Exchangeable-group layout of an ensemble: ordered groups with unique names
/// and positive sizes.  Members within a group share weights and coefficients.
class GroupSpec {
 public:
  struct Group {
    std::string name;
    int size = 0;
  };

  GroupSpec() = default;
  explicit GroupSpec(std::vector<Group> groups);

  const std::vector<Group>& groups() const { return groups_; }
  int group_count() const { return static_cast<int>(groups_.size()); }
  int total_members() const { return total_; }
  int group_size(int k) const { return groups_[static_cast<std::size_t>(k)].size; }
  const std::string& group_name(int k) const {
    return groups_[static_cast<std::size_t>(k)].name;
  }
  int index_of(const std::string& name) const; // -1 when absent

  bool operator==(const GroupSpec& other) const;

  /// The operational Rhine layout used throughout the tests: one high-res
  /// member plus 51/16/11-member ensembles.
  static GroupSpec rhine_multimodel();

 private:
  std::vector<Group> groups_;
  int total_ = 0;
};

/// One forecast instance: per-group member values plus the validating
/// observation.  Values are in whatever units the caller works in (the
/// calibration pipeline stores transformed units here).
struct ForecastCase {
  long case_day = 0;   // issue date as serial day number
  int lead_time_h = 0;
  std::vector<std::vector<double>> members; // [group][member]
  double observation = 0.0;

  /// Sort members within each group ascending.  Members of an exchangeable
  /// group carry no identity, and a canonical order makes every downstream
  /// reduction invariant to member permutations, bit for bit.
  void canonicalize();
};

/// Throws std::invalid_argument when member counts do not match the spec.
void validate_case_shape(const ForecastCase& fc, const GroupSpec& spec);

} // namespace enscal
