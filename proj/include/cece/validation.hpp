#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cece/parallel.hpp"
#include "cece/simulator.hpp"

namespace cece {

// pass / fail: the check's assumptions hold and the identified value agrees
// (or not) with the oracle within tolerance.
// expected_fail / not_detected: the assumptions are violated, by the config
// or by construction in a demonstration, and the deviation was (or was not)
// larger than the tolerance.
enum class CheckStatus { pass, fail, expected_fail, not_detected };
std::string_view to_string(CheckStatus status) noexcept;

struct ValidationCheck {
  std::string name;
  std::string description;
  double identified = 0.0;
  double oracle = 0.0;
  double discrepancy = 0.0;     // |identified - oracle|, or distance outside the bounds
  double standard_error = 0.0;  // combined Monte-Carlo standard error
  double tolerance = 0.0;
  bool assumptions_hold = true;
  bool demonstration = false;  // built-in violation demo, never counted as a failure
  CheckStatus status = CheckStatus::pass;
  std::string note;
};

struct AssumptionState {
  bool no_effect_on_exposure = true;
  bool necessity = true;
  bool independent_censoring = true;
};
AssumptionState assumptions_of(const SimulationConfig& config);

struct ValidationOptions {
  std::optional<std::size_t> n;          // overrides config.n
  std::optional<std::uint64_t> seed;     // overrides config.seed
  bool violation_demo = false;           // expected-fail checks do not fail the run
  double tolerance_se = 3.0;
  std::vector<double> misclassification_sensitivities{0.3, 0.5, 0.8};
};

struct ValidationReport {
  SimulationConfig config;  // after overrides
  AssumptionState assumptions;
  bool violation_demo = false;
  double tolerance_se = 3.0;
  std::vector<ValidationCheck> checks;

  std::size_t count(CheckStatus status) const noexcept;
  // False when any check failed, or when a check on the supplied config
  // detected a violation outside violation-demo mode.
  bool passed() const noexcept;
};

ValidationReport run_validation(const SimulationConfig& config, const ValidationOptions& options = {},
                                Execution exec = Execution::parallel);

// Check groups, exposed for the acceptance suite. `tolerance_se` multiplies
// the combined standard error.
std::vector<ValidationCheck> point_identification_checks(const CounterfactualTable& trial, double tolerance_se,
                                                         Execution exec = Execution::parallel);
std::vector<ValidationCheck> bound_attainment_checks(const SimulationConfig& config, double tolerance_se,
                                                     Execution exec = Execution::parallel);
std::vector<ValidationCheck> marginal_cde_checks(const SimulationConfig& config, double tolerance_se,
                                                 Execution exec = Execution::parallel);
std::vector<ValidationCheck> misclassification_checks(const SubjectTable& observed,
                                                      const std::vector<double>& sensitivities, std::uint64_t seed,
                                                      double tolerance_se, Execution exec = Execution::parallel);
std::vector<ValidationCheck> survival_checks(const CounterfactualTable& trial, double tolerance_se,
                                             Execution exec = Execution::parallel);
std::vector<ValidationCheck> violation_demonstrations(const SimulationConfig& config, double tolerance_se,
                                                      Execution exec = Execution::parallel);

}  // namespace cece
