#include <doctest.h>

#include <algorithm>
#include <string>

#include "cece/error.hpp"
#include "cece/report.hpp"
#include "cece/validation.hpp"

using namespace cece;

namespace {

std::size_t count_demo(const ValidationReport& r, bool demo, CheckStatus status) {
  return static_cast<std::size_t>(std::count_if(r.checks.begin(), r.checks.end(), [&](const ValidationCheck& c) {
    return c.demonstration == demo && c.status == status;
  }));
}

const ValidationCheck* find(const ValidationReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("default configuration passes every non-demo check") {
  ValidationOptions options;
  options.n = 100000;
  const auto report = run_validation(default_simulation_config(), options);
  for (const auto& c : report.checks) {
    INFO(c.name << " identified=" << c.identified << " oracle=" << c.oracle << " se=" << c.standard_error);
    if (!c.demonstration) CHECK(c.status == CheckStatus::pass);
  }
  CHECK(report.passed());
  CHECK(report.count(CheckStatus::fail) == 0);
  for (const char* name : {"relative-cece", "pse-equals-cece", "bounds-sandwich", "lower-bound-attained",
                           "upper-bound-attained", "marginal-cde-deterministic", "survival-bounds-sandwich[10]"}) {
    INFO(name);
    CHECK(find(report, name) != nullptr);
  }
  // Demonstrations detect their violations.
  const auto* demo = find(report, "demo-exposure-effect");
  REQUIRE(demo != nullptr);
  CHECK(demo->status == CheckStatus::expected_fail);
  CHECK(count_demo(report, true, CheckStatus::expected_fail) >= 3);
}

TEST_CASE("a config that violates its assumptions needs violation-demo mode") {
  auto config = default_simulation_config();
  config.exposure_prob[1] = {0.2, 0.3};
  config.longitudinal.reset();
  ValidationOptions options;
  options.n = 100000;
  const auto strict = run_validation(config, options);
  CHECK_FALSE(strict.assumptions.no_effect_on_exposure);
  CHECK(count_demo(strict, false, CheckStatus::expected_fail) >= 1);
  CHECK(strict.count(CheckStatus::fail) == 0);
  CHECK_FALSE(strict.passed());

  options.violation_demo = true;
  const auto demo = run_validation(config, options);
  CHECK(demo.passed());
}

TEST_CASE("reports are byte identical across runs and schedules") {
  auto config = default_simulation_config();
  ValidationOptions options;
  options.n = 20000;
  const auto a = dump(to_json(run_validation(config, options, Execution::parallel)));
  const auto b = dump(to_json(run_validation(config, options, Execution::parallel)));
  const auto c = dump(to_json(run_validation(config, options, Execution::serial)));
  CHECK(a == b);
  CHECK(a == c);
  CHECK(a.find("timestamp") == std::string::npos);
}

TEST_CASE("invalid cohort size") {
  ValidationOptions options;
  options.n = 0;
  CHECK_THROWS_AS(run_validation(default_simulation_config(), options), InputError);
}
