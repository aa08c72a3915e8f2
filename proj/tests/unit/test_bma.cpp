#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <vector>

#include "enscal/bma.hpp"
#include "enscal/rng.hpp"
#include "support/oracles.hpp"
#include "support/reference_em.hpp"

using namespace enscal;
constexpr double kInf = std::numeric_limits<double>::infinity();

namespace {

ForecastCase make_case(long day, std::vector<std::vector<double>> members,
                       double obs) {
  ForecastCase fc;
  fc.case_day = day;
  fc.lead_time_h = 24;
  fc.members = std::move(members);
  fc.observation = obs;
  return fc;
}

// The small fixed instance behind the frozen one-iteration oracle values:
// N=3 cases, one single-member group, bounds [0, 10].
std::vector<ForecastCase> small_instance() {
  return {make_case(1, {{2.0}}, 2.5), make_case(2, {{5.0}}, 4.5),
          make_case(3, {{8.0}}, 8.5)};
}

// Two single-member groups whose members track a shared latent signal; the
// observation follows the group-1 member with probability `mass1`.
std::vector<ForecastCase> mixture_data(Rng& rng, int n, double mass1,
                                       double sigma, double tau) {
  std::vector<ForecastCase> cases;
  cases.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = rng.uniform(2.5, 7.5);
    const double f1 = t + rng.normal(0.0, tau);
    const double f2 = t + rng.normal(0.0, tau);
    const double mu = rng.uniform() < mass1 ? f1 : f2;
    const double x = testsupport::sample_tn_oracle(mu, sigma, 0.0, 10.0, rng);
    cases.push_back(make_case(i, {{f1}, {f2}}, x));
  }
  return cases;
}

} // namespace

TEST_CASE("bma_init: regression, weights, and guards") {
  const GroupSpec one_group({{"g", 1}});

  SUBCASE("perfect regression gives alpha 0, beta 1") {
    std::vector<ForecastCase> cases{make_case(1, {{2.0}}, 2.0),
                                    make_case(2, {{5.0}}, 5.0),
                                    make_case(3, {{7.0}}, 7.0)};
    const EmState s = bma_init(cases, one_group, 0.0, 10.0);
    CHECK(s.alpha[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.beta[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.weights[0] == 1.0);
  }

  SUBCASE("operational group layout: every member starts at 1/79") {
    const GroupSpec spec = GroupSpec::rhine_multimodel();
    Rng rng(41);
    std::vector<ForecastCase> cases;
    for (int i = 0; i < 5; ++i) {
      ForecastCase fc;
      fc.case_day = i;
      fc.lead_time_h = 24;
      for (int k = 0; k < spec.group_count(); ++k) {
        std::vector<double> g(static_cast<std::size_t>(spec.group_size(k)));
        for (double& v : g) v = rng.uniform(3.0, 7.0);
        fc.members.push_back(std::move(g));
      }
      fc.observation = rng.uniform(3.0, 7.0);
      cases.push_back(std::move(fc));
    }
    const EmState s = bma_init(cases, spec, 0.0, 10.0);
    for (double w : s.weights) {
      CHECK(w == doctest::Approx(1.0 / 79.0).epsilon(1e-15));
    }
  }

  SUBCASE("constant forecasts fall back to a unit-slope offset fit") {
    std::vector<ForecastCase> cases{make_case(1, {{4.0}}, 5.0),
                                    make_case(2, {{4.0}}, 6.0),
                                    make_case(3, {{4.0}}, 7.0)};
    const EmState s = bma_init(cases, one_group, 0.0, 10.0);
    CHECK(s.diag.degenerate_regression);
    CHECK(s.beta[0] == 1.0);
    CHECK(s.alpha[0] == doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("rejects out-of-bounds values and short training sets") {
    std::vector<ForecastCase> cases{make_case(1, {{2.0}}, 12.0),
                                    make_case(2, {{5.0}}, 4.5)};
    CHECK_THROWS_AS((void)bma_init(cases, one_group, 0.0, 10.0),
                    std::invalid_argument);
    std::vector<ForecastCase> single{make_case(1, {{2.0}}, 2.0)};
    CHECK_THROWS_AS((void)bma_init(single, one_group, 0.0, 10.0),
                    std::invalid_argument);
  }
}

TEST_CASE("em_e_step responsibilities") {
  const GroupSpec two_groups({{"a", 1}, {"b", 1}});

  SUBCASE("identical components give uniform responsibilities") {
    std::vector<ForecastCase> cases{make_case(1, {{3.0}, {3.0}}, 3.5),
                                    make_case(2, {{5.0}, {5.0}}, 4.5)};
    EmState s = bma_init(cases, two_groups, 0.0, 10.0);
    em_e_step(s);
    for (const auto& per_case : s.z) {
      CHECK(per_case[0][0] == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(per_case[1][0] == doctest::Approx(0.5).epsilon(1e-12));
    }
  }

  SUBCASE("zero weight excludes a group") {
    std::vector<ForecastCase> cases{make_case(1, {{3.0}, {6.0}}, 4.0),
                                    make_case(2, {{4.0}, {7.0}}, 5.0)};
    EmState s = bma_init(cases, two_groups, 0.0, 10.0);
    s.weights = {1.0, 0.0};
    em_e_step(s);
    for (const auto& per_case : s.z) {
      CHECK(per_case[0][0] == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(per_case[1][0] == doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  SUBCASE("equidistant observation with symmetric bounds splits evenly") {
    // mu1 + mu2 equals lower + upper, so both components see the same
    // normalizer and the same distance to the observation.
    std::vector<ForecastCase> cases{make_case(1, {{4.0}, {6.0}}, 5.0),
                                    make_case(2, {{4.0}, {6.0}}, 5.0)};
    EmState s = bma_init(cases, two_groups, 0.0, 10.0);
    s.alpha = {0.0, 0.0};
    s.beta = {1.0, 1.0};
    for (auto& per_case : s.mu) {
      per_case[0][0] = 4.0;
      per_case[1][0] = 6.0;
    }
    s.sigma = 1.3;
    em_e_step(s);
    for (const auto& per_case : s.z) {
      CHECK(per_case[0][0] == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(per_case[1][0] == doctest::Approx(0.5).epsilon(1e-12));
    }
  }

  SUBCASE("responsibilities sum to one per case") {
    Rng rng(42);
    auto cases = mixture_data(rng, 50, 0.3, 1.0, 0.5);
    EmState s = bma_init(cases, two_groups, 0.0, 10.0);
    em_e_step(s);
    for (const auto& per_case : s.z) {
      double total = 0.0;
      for (const auto& row : per_case) {
        for (double v : row) total += v;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("em_update_weights") {
  const GroupSpec two_groups({{"a", 1}, {"b", 2}});
  std::vector<ForecastCase> cases{make_case(1, {{3.0}, {4.0, 5.0}}, 4.0),
                                  make_case(2, {{4.0}, {5.0, 6.0}}, 5.0)};
  EmState s = bma_init(cases, two_groups, 0.0, 10.0);

  SUBCASE("uniform responsibilities are a fixed point") {
    for (auto& per_case : s.z) {
      per_case[0][0] = 1.0 / 3.0;
      per_case[1] = {1.0 / 3.0, 1.0 / 3.0};
    }
    em_update_weights(s);
    CHECK(s.weights[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(s.weights[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }

  SUBCASE("all responsibility on group 2") {
    for (auto& per_case : s.z) {
      per_case[0][0] = 0.0;
      per_case[1] = {0.5, 0.5};
    }
    em_update_weights(s);
    CHECK(s.weights[0] == 0.0);
    CHECK(2.0 * s.weights[1] == doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("group mass is the average case responsibility") {
    s.z[0][0][0] = 1.0;
    s.z[0][1] = {0.0, 0.0};
    s.z[1][0][0] = 0.0;
    s.z[1][1] = {0.5, 0.5};
    em_update_weights(s);
    CHECK(s.weights[0] == doctest::Approx(0.5).epsilon(1e-14));  // mass 0.5, M=1
    CHECK(s.weights[1] == doctest::Approx(0.25).epsilon(1e-14)); // mass 0.5, M=2
  }
}

TEST_CASE("em_update_location: untruncated single-component fixed point") {
  // With z = 1 the initial OLS coefficients already satisfy the weighted
  // least-squares conditions, so the update must leave them unchanged.
  const GroupSpec one_group({{"g", 1}});
  std::vector<ForecastCase> cases{make_case(1, {{2.0}}, 2.5),
                                  make_case(2, {{5.0}}, 4.5),
                                  make_case(3, {{8.0}}, 8.5)};
  EmState s = bma_init(cases, one_group, -kInf, kInf);
  const double alpha0 = s.alpha[0];
  const double beta0 = s.beta[0];
  em_e_step(s);
  em_update_location(s);
  CHECK(s.alpha[0] == doctest::Approx(alpha0).epsilon(1e-12));
  CHECK(s.beta[0] == doctest::Approx(beta0).epsilon(1e-12));
  // and untruncated locations stay at the anchored initial regression
  for (std::size_t i = 0; i < cases.size(); ++i) {
    CHECK(s.mu[i][0][0] == doctest::Approx(s.mu0[i][0][0]).epsilon(1e-14));
  }
}

TEST_CASE("em location updates match the scripted one-iteration oracle") {
  // Frozen values computed by hand-evaluating the update formulae on the
  // small instance before the implementation existed.
  const GroupSpec one_group({{"g", 1}});
  const auto cases = small_instance();

  SUBCASE("initialization") {
    const EmState s = bma_init(cases, one_group, 0.0, 10.0);
    CHECK(s.alpha[0] == doctest::Approx(0.16666666666666667).epsilon(1e-12));
    CHECK(s.beta[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.sigma == doctest::Approx(3.0550504633038933).epsilon(1e-12));
    CHECK(em_log_likelihood(s) ==
          doctest::Approx(-5.4293224071051555).epsilon(1e-10));
  }

  SUBCASE("full-ML location update and scale update") {
    EmState s = bma_init(cases, one_group, 0.0, 10.0);
    em_e_step(s);
    em_update_weights(s);
    em_update_location(s);
    CHECK(s.alpha[0] == doctest::Approx(0.24403697121349877).epsilon(1e-10));
    CHECK(s.beta[0] == doctest::Approx(1.0949422807537460).epsilon(1e-10));
    CHECK(s.mu[0][0][0] == doctest::Approx(1.1025439985069556).epsilon(1e-10));
    CHECK(s.mu[1][0][0] == doctest::Approx(5.4425092639838060).epsilon(1e-10));
    CHECK(s.mu[2][0][0] == doctest::Approx(9.9867437870511696).epsilon(1e-10));
    em_update_sigma(s);
    CHECK(s.sigma * s.sigma ==
          doctest::Approx(3.6571060838828072).epsilon(1e-10));
  }

  SUBCASE("simplified correction and scale update") {
    EmState s = bma_init(cases, one_group, 0.0, 10.0);
    em_e_step(s);
    em_update_weights(s);
    em_update_location_simplified(s);
    CHECK(s.mu[0][0][0] == doctest::Approx(0.97278660466799017).epsilon(1e-10));
    CHECK(s.mu[1][0][0] == doctest::Approx(5.2301785236725515).epsilon(1e-10));
    CHECK(s.mu[2][0][0] == doctest::Approx(9.5291457852999546).epsilon(1e-10));
    em_update_sigma(s);
    CHECK(s.sigma * s.sigma ==
          doctest::Approx(3.5615779207857471).epsilon(1e-10));
  }

  SUBCASE("fixed locations and scale update") {
    EmState s = bma_init(cases, one_group, 0.0, 10.0);
    em_e_step(s);
    em_update_weights(s);
    em_update_sigma(s);
    CHECK(s.sigma * s.sigma ==
          doctest::Approx(3.4610632562107380).epsilon(1e-10));
  }
}

TEST_CASE("em_update_sigma: untruncated classical form and degenerate floor") {
  const GroupSpec one_group({{"g", 1}});
  std::vector<ForecastCase> cases{make_case(1, {{2.0}}, 2.5),
                                  make_case(2, {{5.0}}, 4.5),
                                  make_case(3, {{8.0}}, 8.5)};
  EmState s = bma_init(cases, one_group, -kInf, kInf);
  em_e_step(s);
  em_update_sigma(s);
  double expected = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const double r = cases[i].observation - s.mu[i][0][0];
    expected += r * r;
  }
  expected /= 3.0;
  CHECK(s.sigma * s.sigma == doctest::Approx(expected).epsilon(1e-12));

  // all residuals zero: floored and flagged
  std::vector<ForecastCase> exact{make_case(1, {{2.0}}, 2.0),
                                  make_case(2, {{5.0}}, 5.0),
                                  make_case(3, {{8.0}}, 8.0)};
  EmState t = bma_init(exact, one_group, -kInf, kInf);
  em_e_step(t);
  em_update_sigma(t);
  CHECK(t.diag.sigma_floored);
  CHECK(t.sigma > 0.0);
}

TEST_CASE("untruncated fit matches the classical reference step for step") {
  Rng rng(43);
  const GroupSpec two_groups({{"a", 1}, {"b", 2}});
  std::vector<ForecastCase> cases;
  std::vector<testsupport::RefCase> ref_cases;
  for (int i = 0; i < 60; ++i) {
    const double t = rng.uniform(0.0, 10.0);
    std::vector<std::vector<double>> members{
        {t + rng.normal(0.0, 0.7)},
        {t + rng.normal(0.0, 0.7), t + rng.normal(0.0, 0.7)}};
    // canonical member order within groups, as the library enforces
    if (members[1][0] > members[1][1]) std::swap(members[1][0], members[1][1]);
    const double obs = t + rng.normal(0.0, 1.0);
    cases.push_back(make_case(i, members, obs));
    ref_cases.push_back({members, obs});
  }

  for (auto policy : {testsupport::RefLocationPolicy::kFixed,
                      testsupport::RefLocationPolicy::kConditionalUpdate}) {
    EmState s = bma_init(cases, two_groups, -kInf, kInf);
    testsupport::RefState ref = testsupport::ref_init(ref_cases, {1, 2});
    REQUIRE(s.alpha[0] == doctest::Approx(ref.alpha[0]).epsilon(1e-12));
    REQUIRE(s.sigma == doctest::Approx(ref.sigma).epsilon(1e-12));
    for (int it = 0; it < 20; ++it) {
      em_e_step(s);
      em_update_weights(s);
      if (policy == testsupport::RefLocationPolicy::kConditionalUpdate) {
        em_update_location(s);
      }
      em_update_sigma(s);
      testsupport::ref_iterate(ref, ref_cases, {1, 2}, policy);
      CHECK(s.weights[0] == doctest::Approx(ref.weights[0]).epsilon(1e-10));
      CHECK(s.weights[1] == doctest::Approx(ref.weights[1]).epsilon(1e-10));
      CHECK(s.sigma == doctest::Approx(ref.sigma).epsilon(1e-10));
      if (policy == testsupport::RefLocationPolicy::kConditionalUpdate) {
        CHECK(s.alpha[0] == doctest::Approx(ref.alpha[0]).epsilon(1e-10));
        CHECK(s.beta[1] == doctest::Approx(ref.beta[1]).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("bma_fit recovers mixture weights and scale (reduced-size check)") {
  const GroupSpec two_groups({{"a", 1}, {"b", 1}});
  int good = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed + 100);
    const auto cases = mixture_data(rng, 3000, 0.3, 1.0, 0.5);
    const BmaModel m =
        bma_fit(cases, two_groups, 0.0, 10.0, BmaVariant::kPureMl);
    const double mass1 = m.weights[0];
    if (std::fabs(mass1 - 0.3) <= 0.06 && std::fabs(m.sigma - 1.0) <= 0.06) {
      ++good;
    }
  }
  CHECK(good >= 4);
}

TEST_CASE("likelihood dominance: matching member takes all the weight") {
  const GroupSpec two_groups({{"a", 1}, {"b", 1}});
  Rng rng(44);
  std::vector<ForecastCase> cases;
  for (int i = 0; i < 60; ++i) {
    const double t = rng.uniform(2.0, 8.0);
    // group a nails the observation, group b is noise
    cases.push_back(make_case(i, {{t}, {rng.uniform(2.0, 8.0)}}, t));
  }
  const BmaModel m = bma_fit(cases, two_groups, 0.0, 10.0, BmaVariant::kNaive);
  CHECK(m.weights[0] > 0.95);
}

TEST_CASE("fitted model invariants") {
  const GroupSpec spec({{"a", 2}, {"b", 3}});
  Rng rng(45);
  std::vector<ForecastCase> cases;
  for (int i = 0; i < 80; ++i) {
    const double t = rng.uniform(2.0, 8.0);
    std::vector<std::vector<double>> members(2);
    for (int l = 0; l < 2; ++l) members[0].push_back(t + rng.normal(0, 0.6));
    for (int l = 0; l < 3; ++l) members[1].push_back(t + rng.normal(0, 0.6));
    cases.push_back(
        make_case(i, members,
                  testsupport::sample_tn_oracle(t, 0.8, 0.0, 10.0, rng)));
  }

  for (auto variant :
       {BmaVariant::kPureMl, BmaVariant::kSimplified, BmaVariant::kNaive}) {
    const BmaModel m = bma_fit(cases, spec, 0.0, 10.0, variant);
    double total = 0.0;
    for (int k = 0; k < spec.group_count(); ++k) {
      CHECK(m.weights[static_cast<std::size_t>(k)] >= 0.0);
      total += spec.group_size(k) * m.weights[static_cast<std::size_t>(k)];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(m.sigma > 0.0);
    CHECK(m.diagnostics.final_log_likelihood >=
          m.diagnostics.initial_log_likelihood - 1e-9);
    for (double ll : m.diagnostics.log_likelihood_trace) {
      CHECK(std::isfinite(ll));
    }

    // predictive density integrates to one
    const TruncatedNormalMixture mix = bma_predict(m, cases.front());
    const double mass = testsupport::simpson_oracle(
        [&](double x) { return mix.pdf(x); }, 0.0, 10.0, 1e-10);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("member permutation within a group leaves the fit bitwise identical") {
  const GroupSpec spec({{"a", 3}, {"b", 2}});
  Rng rng(46);
  std::vector<ForecastCase> cases, permuted;
  for (int i = 0; i < 50; ++i) {
    const double t = rng.uniform(2.0, 8.0);
    std::vector<std::vector<double>> members(2);
    for (int l = 0; l < 3; ++l) members[0].push_back(t + rng.normal(0, 0.5));
    for (int l = 0; l < 2; ++l) members[1].push_back(t + rng.normal(0, 0.5));
    const double obs = testsupport::sample_tn_oracle(t, 0.7, 0.0, 10.0, rng);
    cases.push_back(make_case(i, members, obs));
    std::swap(members[0][0], members[0][2]);
    std::swap(members[1][0], members[1][1]);
    permuted.push_back(make_case(i, members, obs));
  }
  const BmaModel m1 = bma_fit(cases, spec, 0.0, 10.0, BmaVariant::kPureMl);
  const BmaModel m2 = bma_fit(permuted, spec, 0.0, 10.0, BmaVariant::kPureMl);
  CHECK(std::memcmp(m1.weights.data(), m2.weights.data(),
                    m1.weights.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(m1.alpha.data(), m2.alpha.data(),
                    m1.alpha.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(m1.beta.data(), m2.beta.data(),
                    m1.beta.size() * sizeof(double)) == 0);
  CHECK(m1.sigma == m2.sigma);
}

TEST_CASE("affine scaling maps the fit as expected") {
  const GroupSpec two_groups({{"a", 1}, {"b", 1}});
  Rng rng(47);
  const auto cases = mixture_data(rng, 400, 0.3, 1.0, 0.5);
  const double c = 2.5;
  std::vector<ForecastCase> scaled = cases;
  for (auto& fc : scaled) {
    fc.observation *= c;
    for (auto& g : fc.members) {
      for (double& v : g) v *= c;
    }
  }
  const BmaModel m1 = bma_fit(cases, two_groups, 0.0, 10.0, BmaVariant::kPureMl);
  const BmaModel m2 =
      bma_fit(scaled, two_groups, 0.0, c * 10.0, BmaVariant::kPureMl);
  CHECK(m2.sigma == doctest::Approx(c * m1.sigma).epsilon(1e-8));
  for (int k = 0; k < 2; ++k) {
    CHECK(m2.alpha[static_cast<std::size_t>(k)] ==
          doctest::Approx(c * m1.alpha[static_cast<std::size_t>(k)]).epsilon(1e-6));
    CHECK(m2.beta[static_cast<std::size_t>(k)] ==
          doctest::Approx(m1.beta[static_cast<std::size_t>(k)]).epsilon(1e-6));
    CHECK(m2.weights[static_cast<std::size_t>(k)] ==
          doctest::Approx(m1.weights[static_cast<std::size_t>(k)]).epsilon(1e-8));
  }
}

TEST_CASE("bma_predict shapes and weight semantics") {
  const GroupSpec one_group({{"g", 1}});
  std::vector<ForecastCase> cases{make_case(1, {{3.0}}, 3.2),
                                  make_case(2, {{6.0}}, 5.9)};
  const BmaModel m = bma_fit(cases, one_group, 0.0, 10.0, BmaVariant::kNaive);

  SUBCASE("single member gives a single component at alpha + beta f") {
    const TruncatedNormalMixture mix = bma_predict(m, cases[0]);
    CHECK(mix.components().size() == 1);
    CHECK(mix.components()[0].mu() ==
          doctest::Approx(m.alpha[0] + m.beta[0] * 3.0).epsilon(1e-12));
    CHECK(mix.weights()[0] == 1.0);
  }

  SUBCASE("member count mismatch is rejected") {
    ForecastCase bad = cases[0];
    bad.members[0].push_back(4.0);
    CHECK_THROWS_AS((void)bma_predict(m, bad), std::invalid_argument);
  }

  SUBCASE("duplicate members in a group merge their weight") {
    const GroupSpec pair_group({{"g", 2}});
    std::vector<ForecastCase> pair_cases{make_case(1, {{3.0, 5.0}}, 3.5),
                                         make_case(2, {{4.0, 6.0}}, 5.0),
                                         make_case(3, {{2.0, 7.0}}, 4.0)};
    const BmaModel pm =
        bma_fit(pair_cases, pair_group, 0.0, 10.0, BmaVariant::kNaive);
    ForecastCase dup = pair_cases[0];
    dup.members[0] = {4.0, 4.0};
    const TruncatedNormalMixture mix = bma_predict(pm, dup);
    // the two identical components act as one with doubled weight
    const TruncatedNormal merged(pm.alpha[0] + pm.beta[0] * 4.0, pm.sigma, 0.0,
                                 10.0);
    const TruncatedNormalMixture single({merged}, {1.0});
    for (double x : {2.0, 4.0, 6.5}) {
      CHECK(mix.cdf(x) == doctest::Approx(single.cdf(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("operational layout: 79 components and 12 free parameters") {
  const GroupSpec spec = GroupSpec::rhine_multimodel();
  Rng rng(48);
  std::vector<ForecastCase> cases;
  for (int i = 0; i < 40; ++i) {
    const double t = rng.uniform(3.0, 7.0);
    ForecastCase fc;
    fc.case_day = i;
    fc.lead_time_h = 24;
    for (int k = 0; k < spec.group_count(); ++k) {
      std::vector<double> g(static_cast<std::size_t>(spec.group_size(k)));
      for (double& v : g) v = t + rng.normal(0.0, 0.4);
      fc.members.push_back(std::move(g));
    }
    fc.observation = testsupport::sample_tn_oracle(t, 0.5, 0.0, 10.0, rng);
    cases.push_back(std::move(fc));
  }
  const BmaModel m = bma_fit(cases, spec, 0.0, 10.0, BmaVariant::kPureMl);
  const TruncatedNormalMixture mix = bma_predict(m, cases.front());
  CHECK(mix.components().size() == 79);
  // free parameters: per-group (weight, alpha, beta) minus the weight-sum
  // constraint, plus the common sigma
  const int free_params = 3 * spec.group_count() - 1 + 1;
  CHECK(free_params == 12);
}
