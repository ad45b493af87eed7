#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "cece/error.hpp"
#include "cece/estimators.hpp"
#include "cece/simulator.hpp"
#include "cece/survival.hpp"

using namespace cece;

namespace {

SimulationConfig single_stratum(std::size_t n, double exposure, double outcome0, double outcome1) {
  SimulationConfig c;
  c.n = n;
  c.seed = 7;
  c.covariate_dist = {1.0};
  c.exposure_prob = {std::vector<double>{exposure}, std::vector<double>{exposure}};
  c.outcome_prob = {std::vector<double>{outcome0}, std::vector<double>{outcome1}};
  c.leak_prob = {std::vector<double>{0.0}, std::vector<double>{0.0}};
  return c;
}

SimulationConfig constant_longitudinal(std::size_t n, int K, double lambda, double p0, double p1, double censor) {
  auto c = single_stratum(n, 1.0, 0.0, 0.0);
  LongitudinalConfig lon;
  lon.intervals = K;
  const auto k = static_cast<std::size_t>(K);
  lon.exposure_hazard = {std::vector<double>(k, lambda), std::vector<double>(k, lambda)};
  lon.outcome_hazard = {std::vector<double>(k, p0), std::vector<double>(k, p1)};
  lon.censor_hazard = {std::vector<double>(k, censor), std::vector<double>(k, censor)};
  c.longitudinal = lon;
  return c;
}

// |observed - expected| within 4 binomial standard errors.
void check_proportion(std::size_t hits, std::size_t n, double p) {
  const double observed = static_cast<double>(hits) / static_cast<double>(n);
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
  CHECK(std::abs(observed - p) <= 4 * se + 1e-12);
}

bool same(const CounterfactualRecord& a, const CounterfactualRecord& b) {
  return a.l == b.l && a.a == b.a && a.e == b.e && a.y == b.y && a.y_e1 == b.y_e1 &&
         a.exposure_onset == b.exposure_onset && a.event_onset == b.event_onset && a.censor_interval == b.censor_interval;
}

}  // namespace

TEST_CASE("config text round trip and validation errors") {
  const auto c = default_simulation_config();
  std::istringstream in(format_simulation_config(c));
  const auto back = parse_simulation_config(in);
  CHECK(format_simulation_config(back) == format_simulation_config(c));

  auto rule_of = [](const std::string& text) {
    std::istringstream s(text);
    try {
      parse_simulation_config(s);
    } catch (const InputError& e) {
      return e.rule();
    }
    return std::string("none");
  };
  CHECK(rule_of("n = 10\nbogus = 1\n") != "none");
  CHECK(rule_of("n = 10\ncovariate_dist = 0.5, 0.5\nexposure_prob = 0.1, 0.2, 0.3\n") == "config-width");
  CHECK(rule_of("n = 10\noutcome_prob = 1.5\n") == "config-probability");
  CHECK(rule_of("n = 10\nexposure_prob = 0.3\n") == "none");
}

TEST_CASE("simulation is deterministic and schedule independent") {
  auto c = default_simulation_config();
  c.n = 50000;
  const auto a = simulate_point_trial(c, Execution::serial);
  const auto b = simulate_point_trial(c, Execution::parallel);
  REQUIRE(a.records.size() == b.records.size());
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < a.records.size(); ++i) mismatches += !same(a.records[i], b.records[i]);
  CHECK(mismatches == 0);

  const auto s = simulate_survival_trial(c, Execution::serial);
  const auto p = simulate_survival_trial(c, Execution::parallel);
  mismatches = 0;
  for (std::size_t i = 0; i < s.records.size(); ++i) mismatches += !same(s.records[i], p.records[i]);
  CHECK(mismatches == 0);

  // Prefix stability: a smaller n draws the same first subjects.
  c.n = 1000;
  const auto prefix = simulate_point_trial(c);
  for (std::size_t i = 0; i < prefix.records.size(); ++i) CHECK(same(prefix.records[i], a.records[i]));

  c.seed += 1;
  const auto other = simulate_point_trial(c);
  mismatches = 0;
  for (std::size_t i = 0; i < other.records.size(); ++i) mismatches += !same(other.records[i], a.records[i]);
  CHECK(mismatches > 0);
}

TEST_CASE("assumption toggles hold row by row") {
  auto c = default_simulation_config();
  c.n = 20000;
  const auto t = simulate_point_trial(c);
  for (const auto& r : t.records) {
    CHECK(r.e[0] == r.e[1]);
    for (int a = 0; a < 2; ++a) CHECK(r.y[a] <= r.e[a]);
  }
  // Consistency projection.
  const auto obs = t.observed.records();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto a = index_of(t.records[i].a);
    CHECK(obs[i].arm == t.records[i].a);
    CHECK(obs[i].outcome == t.records[i].y[a]);
    CHECK(*obs[i].exposure == t.records[i].e[a]);
    CHECK(obs[i].strata == StratumKey{static_cast<int>(t.records[i].l)});
  }

  c.necessity = false;
  c.leak_prob = {std::vector<double>(2, 0.2), std::vector<double>(2, 0.2)};
  const auto leaky = simulate_point_trial(c);
  std::size_t leaks = 0;
  for (const auto& r : leaky.records) leaks += r.y[0] > r.e[0];
  CHECK(leaks > 0);
}

TEST_CASE("degenerate configurations") {
  auto c = single_stratum(5000, 0.0, 0.5, 0.5);
  for (const auto& r : simulate_point_trial(c).records) CHECK(r.y[0] + r.y[1] == 0);

  c = single_stratum(5000, 0.5, 0.5, 0.5);
  c.treat_prob = 0.0;
  const auto t = simulate_point_trial(c);
  for (const auto& r : t.records) CHECK(r.a == Arm::control);
  CHECK_THROWS_AS(summarize_arms(t.observed), PreconditionError);

  c.n = 0;
  CHECK_THROWS_AS(simulate_point_trial(c), InputError);
}

TEST_CASE("arm means converge to the closed form") {
  // P(E) = 0.6, control risk 0.031, vaccine risk 0.009.
  const double p0 = 0.031 / 0.6, p1 = 0.009 / 0.6;
  const auto t = simulate_point_trial(single_stratum(1000000, 0.6, p0, p1));
  std::size_t n[2] = {0, 0}, hits[2] = {0, 0}, exposed = 0;
  for (const auto& r : t.records) {
    const auto a = index_of(r.a);
    ++n[a];
    hits[a] += r.y[a];
    exposed += r.e[0];
  }
  check_proportion(hits[0], n[0], 0.031);
  check_proportion(hits[1], n[1], 0.009);
  check_proportion(exposed, t.records.size(), 0.6);
  check_proportion(n[1], t.records.size(), 0.5);
}

TEST_CASE("survival: no censoring gives exact incidence") {
  const auto c = constant_longitudinal(20000, 6, 0.1, 0.2, 0.05, 0.0);
  const auto t = simulate_survival_trial(c);
  const auto mu = cumulative_incidence(discrete_hazards(build_event_table(t.observed)));
  for (int k = 1; k <= 6; ++k) {
    std::size_t n[2] = {0, 0}, events[2] = {0, 0};
    for (const auto& r : t.records) {
      const auto a = index_of(r.a);
      ++n[a];
      events[a] += r.event_by(r.a, k);
    }
    for (Arm a : kArms) {
      const auto i = index_of(a);
      CHECK(mu.at(a, k) == doctest::Approx(static_cast<double>(events[i]) / n[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("survival: no exposure means no events") {
  const auto t = simulate_survival_trial(constant_longitudinal(5000, 4, 0.0, 0.5, 0.5, 0.1));
  for (const auto& r : t.records) {
    CHECK(r.event_onset[0] == 0);
    CHECK(r.event_onset[1] == 0);
  }
}

TEST_CASE("survival: two-interval chain-rule frequencies") {
  const double lambda = 0.3, p = 0.4, censor = 0.15;
  const std::size_t n = 400000;
  auto c = constant_longitudinal(n, 2, lambda, p, p, censor);
  const auto t = simulate_survival_trial(c);
  std::size_t event1 = 0, censor1 = 0, event2 = 0, censor2 = 0;
  for (const auto& r : t.observed.records()) {
    if (r.event_interval == 1) ++event1;
    if (r.event_interval == 2) ++event2;
    if (r.censor_interval == 1) ++censor1;
    if (r.censor_interval == 2) ++censor2;
  }
  const double c1 = censor, c2 = censor;
  check_proportion(event1, n, (1 - c1) * lambda * p);
  check_proportion(censor1, n, c1);
  check_proportion(event2, n, (1 - c1) * (1 - c2) * (lambda * (1 - p) + (1 - lambda) * lambda) * p);
  check_proportion(censor2, n, (1 - c1) * (1 - lambda * p) * c2);
}

TEST_CASE("misclassification") {
  const auto t = simulate_point_trial(single_stratum(200000, 0.8, 0.3, 0.1));
  const auto same_table = misclassify_outcome(t.observed, 1.0, 3);
  for (std::size_t i = 0; i < t.observed.size(); ++i) {
    CHECK(same_table.records()[i].outcome == t.observed.records()[i].outcome);
  }
  const auto base = summarize_arms(t.observed);
  const auto half = summarize_arms(misclassify_outcome(t.observed, 0.5, 3));
  for (Arm a : kArms) {
    const double m = base.mean(a);
    const double se = std::sqrt(0.25 * m / base.arm(a).n);
    CHECK(std::abs(half.mean(a) - 0.5 * m) <= 4 * se);
  }
  // Specificity is perfect: no new positives.
  const auto mis = misclassify_outcome(t.observed, 0.3, 9);
  for (std::size_t i = 0; i < t.observed.size(); ++i) {
    CHECK(mis.records()[i].outcome <= t.observed.records()[i].outcome);
  }
  CHECK_THROWS_AS(misclassify_outcome(t.observed, 0.0, 1), InputError);
}
