#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cece/inference.hpp"
#include "cece/trial_data.hpp"

namespace cece {

enum class Scale { difference, ratio, fraction };
std::string_view to_string(Scale scale) noexcept;

struct EstimateWithCI {
  std::string estimand;
  double point = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double level = 0.95;
  Scale scale = Scale::difference;
  IntervalKind method = IntervalKind::wald_difference;
  bool ci_bounded = true;
  bool orientation_swapped = false;
  std::array<std::size_t, 2> n_per_arm{};  // indexed by Arm
  std::vector<std::string> warnings;
};

// Sharp bounds on the absolute CECE, E(Y^0 | E=1) - E(Y^1 | E=1).
// lower = mu(0) - mu(1) on the difference scale; upper = 1 - mu(1)/mu(0) on the
// fraction scale. When mu(0) < mu(1) the arms are swapped first and
// `orientation_swapped` is set.
struct BoundsEstimate {
  EstimateWithCI lower;
  EstimateWithCI upper;
  bool orientation_swapped = false;
};

struct EstimatorOptions {
  double level = 0.95;
  IntervalKind ratio_method = IntervalKind::log_delta_ratio;
  // Adds 0.5 events and 1 subject to each arm when an arm has zero events.
  // Binary mode only.
  bool continuity_correction = false;
};

// Caller's explicit assertion that exposure deterministically causes the
// outcome in the untreated, P(Y^{a=0,e=1} = 1) = 1.
enum class DeterministicExposure { not_asserted, asserted };

// mu(1) - mu(0), Wald interval.
EstimateWithCI estimate_ate(const ArmSummary& summary, const EstimatorOptions& options = {});

// mu(1) / mu(0). Identifies the relative CECE, relative principal stratum
// effect and relative ATE at once. Any non-negative outcome.
EstimateWithCI estimate_relative_cece(const ArmSummary& summary, const EstimatorOptions& options = {});

// Binary outcomes only.
BoundsEstimate bound_absolute_cece(const ArmSummary& summary, const EstimatorOptions& options = {});

// mu(1, l) / mu(0, l) for one stratum: the relative CDE given L = l when L is
// sufficient for exposure-outcome confounding, and the stratum relative CECE.
EstimateWithCI estimate_conditional_cde(const ArmSummary& summary, const StratumKey& stratum,
                                        const EstimatorOptions& options = {});

struct MarginalCdeEstimate {
  EstimateWithCI relative;      // sum_l [mu(1,l)/mu(0,l)] P(L = l)
  EstimateWithCI absolute_ppe;  // 1 - relative
};

// Refuses to compute unless the deterministic-exposure assumption is asserted.
MarginalCdeEstimate estimate_marginal_cde_deterministic(const ArmSummary& summary, DeterministicExposure assumption,
                                                        const EstimatorOptions& options = {});

// 1 - mu(1)/mu(0), the excess fraction among the exposed (commonly reported
// as vaccine efficacy).
EstimateWithCI estimate_excess_fraction(const ArmSummary& summary, const EstimatorOptions& options = {});

// Moment-level building blocks, shared with the time-to-event curves.
EstimateWithCI ratio_from_moments(std::string estimand, const ArmMoments& m1, const ArmMoments& m0,
                                  std::array<std::size_t, 2> n_per_arm, const IntervalMethod& method);
BoundsEstimate bounds_from_moments(const ArmMoments& m1, const ArmMoments& m0, std::array<std::size_t, 2> n_per_arm,
                                   const IntervalMethod& ratio_method);

}  // namespace cece
