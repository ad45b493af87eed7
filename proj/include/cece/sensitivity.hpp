#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "cece/inference.hpp"
#include "cece/parallel.hpp"
#include "cece/trial_data.hpp"

namespace cece {

// One point on the sensitivity relation. Under exposure necessity the two
// parameters are dual: p_outcome_given_exposure * p_exposure = mu(0).
struct SensitivityPoint {
  double p_exposure = 0.0;                // P(E = 1 | A = 0)
  double p_outcome_given_exposure = 0.0;  // P(Y = 1 | E = 1, A = 0)
  double acece = 0.0;                     // point-identified absolute CECE
  bool orientation_swapped = false;
  // Present only when sampling-error propagation was requested; the
  // sensitivity parameter itself is treated as fixed.
  std::optional<Interval> ci;
};

struct SensitivityOptions {
  bool propagate_sampling_error = false;
  double level = 0.95;
};

// acece = p_y_given_e * (1 - mu(1)/mu(0)); p_exposure = mu(0)/p_y_given_e.
// Pre: binary mode, p_y_given_e in [mu(0), 1].
SensitivityPoint acece_from_outcome_risk(const ArmSummary& summary, double p_y_given_e,
                                         const SensitivityOptions& options = {});

// acece = mu(0)/p_e - mu(1)/p_e; p_outcome_given_exposure = mu(0)/p_e.
// Pre: binary mode, p_e in [mu(0), 1].
SensitivityPoint acece_from_exposure_risk(const ArmSummary& summary, double p_e,
                                          const SensitivityOptions& options = {});

struct SensitivityCurve {
  std::vector<SensitivityPoint> points;  // ascending p_exposure
  std::array<ArmStats, 2> source_arms{};
  bool orientation_swapped = false;
};

// Evaluates acece_from_exposure_risk on an even grid of grid_size points over
// [mu(0), 1], endpoints included.
SensitivityCurve sensitivity_sweep(const ArmSummary& summary, std::size_t grid_size,
                                   const SensitivityOptions& options = {}, Execution exec = Execution::parallel);

}  // namespace cece
