#include <doctest.h>

#include <cmath>
#include <vector>

#include "cece/error.hpp"
#include "cece/estimators.hpp"
#include "cece/rng.hpp"

using namespace cece;

namespace {

// Reference two-arm trial risks and sizes.
const ArmSummary kTrial = ArmSummary::from_aggregates(0.009, 5807, 0.031, 5829);

ArmStats binary_arm(std::size_t n, double p) { return {n, p, p * (1.0 - p)}; }

ArmSummary stratified(const std::vector<std::array<double, 2>>& risks, const std::vector<double>& weights,
                      std::size_t n_per_cell) {
  ArmSummary s;
  double total[2] = {0, 0};
  for (std::size_t l = 0; l < risks.size(); ++l) {
    StratumSummary cell;
    cell.key = {static_cast<int>(l)};
    cell.weight = weights[l];
    for (int a = 0; a < 2; ++a) {
      cell.arms[a] = binary_arm(n_per_cell, risks[l][a]);
      total[a] += weights[l] * risks[l][a];
    }
    s.strata.push_back(cell);
  }
  for (int a = 0; a < 2; ++a) s.arms[a] = binary_arm(n_per_cell * risks.size(), total[a]);
  return s;
}

}  // namespace

TEST_CASE("reference trial aggregates") {
  const auto ate = estimate_ate(kTrial);
  CHECK(ate.point == doctest::Approx(-0.022).epsilon(1e-12));
  CHECK(ate.ci_lower < ate.point);
  CHECK(ate.point < ate.ci_upper);

  const auto r = estimate_relative_cece(kTrial);
  CHECK(r.point == doctest::Approx(0.2903).epsilon(0.0005 / 0.2903));
  CHECK(r.point == doctest::Approx(9.0 / 31.0).epsilon(1e-14));
  CHECK(r.scale == Scale::ratio);
  CHECK(r.method == IntervalKind::log_delta_ratio);
  CHECK(r.n_per_arm == std::array<std::size_t, 2>{5829, 5807});

  const auto b = bound_absolute_cece(kTrial);
  CHECK(b.lower.point == doctest::Approx(0.022).epsilon(1e-12));
  CHECK(b.upper.point == doctest::Approx(0.7097).epsilon(0.0005 / 0.7097));
  CHECK_FALSE(b.orientation_swapped);

  const auto ef = estimate_excess_fraction(kTrial);
  CHECK(ef.point == doctest::Approx(22.0 / 31.0).epsilon(1e-14));
  CHECK(ef.ci_lower == doctest::Approx(1.0 - r.ci_upper));
  CHECK(ef.ci_upper == doctest::Approx(1.0 - r.ci_lower));
}

TEST_CASE("trivial identities") {
  const auto equal = ArmSummary::from_aggregates(0.2, 100, 0.2, 100);
  CHECK(estimate_ate(equal).point == 0.0);
  CHECK(estimate_relative_cece(equal).point == 1.0);
  CHECK(estimate_excess_fraction(equal).point == 0.0);

  const auto certain = ArmSummary::from_aggregates(0.4, 100, 1.0, 100);
  const auto b = bound_absolute_cece(certain);
  CHECK(b.lower.point == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(b.upper.point == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("orientation is swapped for a harmful treatment") {
  const auto harmful = ArmSummary::from_aggregates(0.05, 1000, 0.02, 1000);
  const auto b = bound_absolute_cece(harmful);
  CHECK(b.orientation_swapped);
  CHECK(b.lower.orientation_swapped);
  CHECK(b.lower.point == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(b.upper.point == doctest::Approx(1.0 - 0.02 / 0.05).epsilon(1e-12));
}

TEST_CASE("ratio estimands with empty arms") {
  CHECK_THROWS_AS(estimate_relative_cece(ArmSummary::from_aggregates(0.1, 100, 0.0, 100)), PreconditionError);
  CHECK_THROWS_AS(bound_absolute_cece(ArmSummary::from_aggregates(0.0, 100, 0.0, 100)), PreconditionError);

  const auto zero = estimate_relative_cece(ArmSummary::from_aggregates(0.0, 100, 0.1, 100));
  CHECK(zero.point == 0.0);
  CHECK_FALSE(zero.ci_bounded);
  CHECK(std::isinf(zero.ci_upper));

  EstimatorOptions cc;
  cc.continuity_correction = true;
  const auto corrected = estimate_relative_cece(ArmSummary::from_aggregates(0.0, 100, 0.1, 100), cc);
  CHECK(corrected.point == doctest::Approx((0.5 / 101) / (10.5 / 101)).epsilon(1e-12));
  CHECK(corrected.ci_bounded);
  // Difference estimands are never corrected.
  CHECK(estimate_ate(ArmSummary::from_aggregates(0.0, 100, 0.1, 100), cc).point == doctest::Approx(-0.1));
}

TEST_CASE("Fieller option") {
  EstimatorOptions fieller;
  fieller.ratio_method = IntervalKind::fieller_ratio;
  const auto r = estimate_relative_cece(kTrial, fieller);
  CHECK(r.method == IntervalKind::fieller_ratio);
  CHECK(r.ci_lower < r.point);
  CHECK(r.point < r.ci_upper);
}

TEST_CASE("conditional and marginal CDE") {
  const auto s = stratified({{0.05, 0.02}, {0.10, 0.04}}, {0.5, 0.5}, 1000);
  CHECK(estimate_conditional_cde(s, {0}).point == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(estimate_conditional_cde(s, {0}).estimand == "rcde[0]");
  CHECK_THROWS_AS(estimate_conditional_cde(s, {7}), PreconditionError);

  CHECK_THROWS_AS(estimate_marginal_cde_deterministic(s, DeterministicExposure::not_asserted), PreconditionError);

  const auto two = stratified({{0.5, 0.1}, {0.5, 0.2}}, {0.5, 0.5}, 1000);
  const auto m = estimate_marginal_cde_deterministic(two, DeterministicExposure::asserted);
  CHECK(m.relative.point == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(m.absolute_ppe.point == doctest::Approx(0.7).epsilon(1e-14));

  // One stratum reduces to the crude ratio.
  const auto one = stratified({{0.2, 0.05}}, {1.0}, 500);
  CHECK(estimate_marginal_cde_deterministic(one, DeterministicExposure::asserted).relative.point ==
        doctest::Approx(estimate_relative_cece(one).point).epsilon(1e-14));
  CHECK(estimate_conditional_cde(one, {0}).point == doctest::Approx(estimate_relative_cece(one).point).epsilon(1e-14));

  // Empty cell.
  auto holes = s;
  holes.strata[1].arms[0].n = 0;
  CHECK_THROWS_AS(estimate_conditional_cde(holes, {1}), PreconditionError);
}

TEST_CASE("bounds require a binary outcome") {
  ArmSummary s;
  s.mode = AnalysisMode::nonneg_point;
  s.arms[0] = {100, 2.0, 1.0};
  s.arms[1] = {100, 1.0, 1.0};
  CHECK_THROWS_AS(bound_absolute_cece(s), PreconditionError);
  CHECK(estimate_relative_cece(s).point == 0.5);
}

TEST_CASE("exact identities over random summaries") {
  for (std::uint64_t i = 0; i < 5000; ++i) {
    SubjectStream rng(2024, RngDomain::coverage, i);
    const double mu0 = 1e-4 + (1.0 - 1e-4) * rng.uniform();
    const double mu1 = (i % 7 == 0) ? mu0 : rng.uniform();
    const auto n1 = static_cast<std::size_t>(10 + rng.uniform() * 10000);
    const auto n0 = static_cast<std::size_t>(10 + rng.uniform() * 10000);
    const auto s = ArmSummary::from_aggregates(mu1, n1, mu0, n0);
    const auto b = bound_absolute_cece(s);
    const auto ate = estimate_ate(s);
    if (mu0 >= mu1) {
      REQUIRE_FALSE(b.orientation_swapped);
      CHECK(b.upper.point == estimate_excess_fraction(s).point);
      CHECK(b.lower.point == -ate.point);
      CHECK(b.lower.point <= b.upper.point);
    } else {
      CHECK(b.orientation_swapped);
      CHECK(b.lower.point == ate.point);
    }
    CHECK(estimate_excess_fraction(s).point == 1.0 - estimate_relative_cece(s).point);
    for (const auto* e : {&ate, &b.lower}) {
      CHECK(e->ci_lower <= e->point);
      CHECK(e->point <= e->ci_upper);
    }
  }
  // mu(0) = 1: bounds coincide.
  for (double mu1 : {0.0, 0.13, 0.5, 0.999}) {
    const auto b = bound_absolute_cece(ArmSummary::from_aggregates(mu1, 50, 1.0, 50));
    CHECK(b.lower.point == b.upper.point);
  }
}

TEST_CASE("scale invariance for non-negative outcomes") {
  std::vector<SubjectRecord> base, scaled;
  const double c = 3.7;
  for (std::uint64_t i = 0; i < 400; ++i) {
    SubjectStream rng(99, RngDomain::coverage, i);
    SubjectRecord r;
    r.id = std::to_string(i);
    r.arm = rng.uniform() < 0.5 ? Arm::vaccine : Arm::control;
    r.outcome = rng.uniform() * (r.arm == Arm::vaccine ? 1.0 : 2.0);
    base.push_back(r);
    r.outcome *= c;
    scaled.push_back(r);
  }
  TableOptions options;
  options.mode = AnalysisMode::nonneg_point;
  const auto a = summarize_arms(SubjectTable::create(base, {}, options));
  const auto b = summarize_arms(SubjectTable::create(scaled, {}, options));
  CHECK(estimate_relative_cece(b).point == doctest::Approx(estimate_relative_cece(a).point).epsilon(1e-13));
  CHECK(estimate_excess_fraction(b).point == doctest::Approx(estimate_excess_fraction(a).point).epsilon(1e-13));
  CHECK(estimate_ate(b).point == doctest::Approx(c * estimate_ate(a).point).epsilon(1e-13));
  CHECK(estimate_relative_cece(b).ci_lower == doctest::Approx(estimate_relative_cece(a).ci_lower).epsilon(1e-12));
}
