#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cece/estimators.hpp"
#include "cece/inference.hpp"
#include "cece/trial_data.hpp"

namespace cece {

// Discrete hazard in one interval:
//   h(a, k) = events(a, k) / (at_risk(a, k) - censored(a, k)).
// `defined` is false when the denominator is empty.
struct HazardEstimate {
  double value = 0.0;
  std::size_t risk_set = 0;  // at_risk - censored
  std::size_t events = 0;
  bool defined = false;
};

struct HazardSeries {
  int interval_count = 0;
  std::array<std::vector<HazardEstimate>, 2> arms{};  // k = 1..K at index k - 1
  std::array<std::size_t, 2> initial_at_risk{};

  const HazardEstimate& at(Arm a, int k) const { return arms[index_of(a)].at(static_cast<std::size_t>(k - 1)); }
};

HazardSeries discrete_hazards(const DiscreteEventTable& table);

// Product-limit cumulative incidence
//   mu(a, k) = sum_{s<=k} h(a, s) prod_{j<s} (1 - h(a, j))
// with a Greenwood variance. Accumulation stops at the first interval whose
// hazard is undefined; `horizon[a]` is the last identified interval.
struct IncidenceSeries {
  int interval_count = 0;
  std::array<std::vector<double>, 2> incidence{};
  std::array<std::vector<double>, 2> variance{};
  std::array<int, 2> horizon{};
  std::array<std::size_t, 2> initial_at_risk{};

  int common_horizon() const noexcept { return horizon[0] < horizon[1] ? horizon[0] : horizon[1]; }
  // Throws PreconditionError past the arm's horizon.
  double at(Arm a, int k) const;
  ArmMoments moments(Arm a, int k) const;
};

IncidenceSeries cumulative_incidence(const HazardSeries& hazards);

Interval incidence_ratio_ci(const IncidenceSeries& series, int k, double level);

struct RatioCurvePoint {
  int k = 0;
  std::optional<EstimateWithCI> estimate;  // empty when mu(0, k) = 0
  std::string note;
};

struct BoundsCurvePoint {
  int k = 0;
  std::optional<BoundsEstimate> bounds;
  std::string note;
};

// Both curves cover k = 1..common_horizon().
std::vector<RatioCurvePoint> relative_cece_curve(const IncidenceSeries& incidences, double level);
std::vector<BoundsCurvePoint> absolute_cece_bounds_curve(const IncidenceSeries& incidences, double level);

}  // namespace cece
