#include "enscal/ensemble.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace enscal {

GroupSpec::GroupSpec(std::vector<Group> groups) : groups_(std::move(groups)) {
  if (groups_.empty()) {
    throw std::invalid_argument("GroupSpec: needs at least one group");
  }
  std::unordered_set<std::string> seen;
  for (const auto& g : groups_) {
    if (g.size < 1) {
      throw std::invalid_argument("GroupSpec: group sizes must be >= 1");
    }
    if (g.name.empty() || !seen.insert(g.name).second) {
      throw std::invalid_argument("GroupSpec: group names must be unique and non-empty");
    }
    total_ += g.size;
  }
}

int GroupSpec::index_of(const std::string& name) const {
  for (std::size_t k = 0; k < groups_.size(); ++k) {
    if (groups_[k].name == name) return static_cast<int>(k);
  }
  return -1;
}

bool GroupSpec::operator==(const GroupSpec& other) const {
  if (groups_.size() != other.groups_.size()) return false;
  for (std::size_t k = 0; k < groups_.size(); ++k) {
    if (groups_[k].name != other.groups_[k].name ||
        groups_[k].size != other.groups_[k].size) {
      return false;
    }
  }
  return true;
}

GroupSpec GroupSpec::rhine_multimodel() {
  return GroupSpec({{"hres", 1}, {"eps", 51}, {"cosmo", 16}, {"gefs", 11}});
}

void ForecastCase::canonicalize() {
  for (auto& group : members) {
    std::sort(group.begin(), group.end());
  }
}

void validate_case_shape(const ForecastCase& fc, const GroupSpec& spec) {
  if (static_cast<int>(fc.members.size()) != spec.group_count()) {
    throw std::invalid_argument("ForecastCase: group count mismatch");
  }
  for (int k = 0; k < spec.group_count(); ++k) {
    if (static_cast<int>(fc.members[static_cast<std::size_t>(k)].size()) !=
        spec.group_size(k)) {
      throw std::invalid_argument("ForecastCase: member count mismatch in group " +
                                  spec.group_name(k));
    }
  }
}

} // namespace enscal
