#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "cece/parallel.hpp"
#include "cece/simulator.hpp"

namespace cece {

// A causal quantity averaged directly over potential-outcome columns.
// `value` is empty when the conditioning set has no members; it is never NaN.
// `standard_error` is the Monte-Carlo standard error from the influence
// function of the ratio or difference of means over the conditioning set.
struct OracleValue {
  std::optional<double> value;
  double standard_error = 0.0;
  std::size_t support = 0;

  bool empty() const noexcept { return !value.has_value(); }
};

// Relative contrasts are vaccine over control; absolute contrasts are control
// minus vaccine (the orientation of the bounds), except `ate`, which is
// E(Y^1) - E(Y^0) like estimate_ate.
struct PointOracleReport {
  OracleValue relative_cece;          // E(Y^1 | E=1) / E(Y^0 | E=1), E the observed exposure
  OracleValue absolute_cece;          // E(Y^0 | E=1) - E(Y^1 | E=1)
  OracleValue relative_pse;           // conditioning on E^0 = E^1 = 1
  OracleValue absolute_pse;
  OracleValue relative_naive;         // E(Y^1 | E^1=1) / E(Y^0 | E^0=1)
  OracleValue absolute_naive;         // E(Y^0 | E^0=1) - E(Y^1 | E^1=1)
  OracleValue relative_ate;           // E(Y^1) / E(Y^0)
  OracleValue ate;                    // E(Y^1) - E(Y^0)
  OracleValue relative_marginal_cde;  // E(Y^{1,e=1}) / E(Y^{0,e=1})
  std::vector<OracleValue> relative_conditional_cde;  // per stratum code l
  // E(Y | E=1, A=a) computed from observed columns; index by Arm.
  std::array<OracleValue, 2> observed_risk_given_exposed{};
};

PointOracleReport oracle_point_effects(const CounterfactualTable& table, Execution exec = Execution::parallel);

struct SurvivalOracleReport {
  int k = 0;
  OracleValue relative_cece;  // E(Y_k^1 | E_k^1=1) / E(Y_k^0 | E_k^0=1), uncensored
  OracleValue absolute_cece;  // E(Y_k^0 | E_k^0=1) - E(Y_k^1 | E_k^1=1)
  OracleValue ate;            // E(Y_k^1) - E(Y_k^0)
  OracleValue relative_ate;
  std::array<double, 2> risk{};  // E(Y_k^a)
};

SurvivalOracleReport oracle_survival_effects(const CounterfactualTable& table, int k,
                                             Execution exec = Execution::parallel);

}  // namespace cece
