#include <doctest.h>

#include <cmath>
#include <vector>

#include "enscal/rng.hpp"
#include "enscal/synthetic.hpp"
#include "enscal/verification.hpp"

using namespace enscal;

namespace {

// Chi-square upper-tail p-value via the Wilson-Hilferty cube-root
// approximation, good enough for coarse flatness checks.
double chi2_p_approx(double stat, int dof) {
  const double k = static_cast<double>(dof);
  const double z =
      (std::cbrt(stat / k) - (1.0 - 2.0 / (9.0 * k))) / std::sqrt(2.0 / (9.0 * k));
  return 0.5 * std::erfc(z * 0.7071067811865476);
}

double rank_flatness_p(const Dataset& ds, std::uint64_t seed) {
  const int m1 = ds.group_spec().total_members() + 1;
  std::vector<long long> counts(static_cast<std::size_t>(m1), 0);
  Rng rng(seed);
  long long total = 0;
  for (const auto& [key, fc] : ds.cases()) {
    std::vector<double> all;
    for (const auto& g : fc.members) all.insert(all.end(), g.begin(), g.end());
    const int r = verification_rank(all, fc.observation, rng);
    ++counts[static_cast<std::size_t>(r - 1)];
    ++total;
  }
  double stat = 0.0;
  const double expected = static_cast<double>(total) / m1;
  for (long long c : counts) {
    stat += (c - expected) * (c - expected) / expected;
  }
  return chi2_p_approx(stat, m1 - 1);
}

} // namespace

TEST_CASE("generator shape and determinism") {
  SynthScenario sc;
  sc.n_days = 30;
  sc.lead_times = {1, 24};
  sc.groups = GroupSpec({{"a", 2}, {"b", 3}});
  const Dataset d1 = synth_generate(sc, 99);
  const Dataset d2 = synth_generate(sc, 99);
  CHECK(d1.case_count() == 60);
  CHECK(d1.issue_days().size() == 30);
  CHECK(d1.lead_times() == std::vector<int>{1, 24});
  // bit-identical regeneration
  for (const auto& [key, fc] : d1.cases()) {
    const ForecastCase* other = d2.find(key.first, key.second);
    REQUIRE(other != nullptr);
    CHECK(fc.observation == other->observation);
    CHECK(fc.members == other->members);
  }
  const Dataset d3 = synth_generate(sc, 100);
  CHECK(d3.find(d1.issue_days()[0], 1)->observation !=
        d1.find(d1.issue_days()[0], 1)->observation);
}

TEST_CASE("values respect the physical bounds") {
  SynthScenario sc;
  sc.n_days = 60;
  sc.lead_times = {1, 120};
  const Dataset ds = synth_generate(sc, 7);
  for (const auto& [key, fc] : ds.cases()) {
    CHECK(fc.observation > sc.lower_cm);
    CHECK(fc.observation < sc.upper_cm);
    for (const auto& g : fc.members) {
      for (double v : g) {
        CHECK(v > sc.lower_cm);
        CHECK(v < sc.upper_cm);
      }
    }
  }
}

TEST_CASE("calibrated scenario yields flat rank histograms") {
  SynthScenario sc;
  sc.n_days = 400;
  sc.lead_times = {24};
  sc.dispersion = 1.0;
  sc.groups = GroupSpec({{"a", 10}, {"b", 9}});
  int pass = 0;
  for (std::uint64_t seed : {11ULL, 22ULL, 33ULL, 44ULL, 55ULL}) {
    if (rank_flatness_p(synth_generate(sc, seed), seed) > 0.01) ++pass;
  }
  CHECK(pass >= 4);
}

TEST_CASE("underdispersed scenario produces U-shaped rank histograms") {
  SynthScenario sc;
  sc.n_days = 300;
  sc.lead_times = {24};
  sc.dispersion = 0.4;
  const Dataset ds = synth_generate(sc, 5);
  const int m1 = ds.group_spec().total_members() + 1;
  std::vector<long long> counts(static_cast<std::size_t>(m1), 0);
  Rng rng(5);
  for (const auto& [key, fc] : ds.cases()) {
    std::vector<double> all;
    for (const auto& g : fc.members) all.insert(all.end(), g.begin(), g.end());
    ++counts[static_cast<std::size_t>(verification_rank(all, fc.observation, rng) - 1)];
  }
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < counts.size(); ++i) interior += counts[i];
  const double interior_mean = interior / (m1 - 2);
  CHECK(counts.front() > 2 * interior_mean);
  CHECK(counts.back() > 2 * interior_mean);
}

TEST_CASE("operational group layout is supported") {
  SynthScenario sc;
  sc.n_days = 3;
  sc.lead_times = {24};
  sc.groups = GroupSpec::rhine_multimodel();
  sc.group_bias = {0.3, -0.15, 0.2, -0.25};
  const Dataset ds = synth_generate(sc, 1);
  const ForecastCase* fc = ds.find(ds.issue_days()[0], 24);
  REQUIRE(fc != nullptr);
  CHECK(fc->members[0].size() == 1);
  CHECK(fc->members[1].size() == 51);
  CHECK(fc->members[2].size() == 16);
  CHECK(fc->members[3].size() == 11);
}

TEST_CASE("infeasible scenarios are rejected") {
  SynthScenario sc;
  sc.base_level_cm = 10.0; // below the lower bound of 17.5
  CHECK_THROWS_AS((void)synth_generate(sc, 1), std::invalid_argument);
  SynthScenario sc2;
  sc2.process_sd = 100.0;
  CHECK_THROWS_AS((void)synth_generate(sc2, 1), std::invalid_argument);
  SynthScenario sc3;
  sc3.group_bias = {0.1};
  CHECK_THROWS_AS((void)synth_generate(sc3, 1), std::invalid_argument);
}
