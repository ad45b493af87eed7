#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cece/estimators.hpp"
#include "cece/sensitivity.hpp"
#include "cece/survival.hpp"
#include "cece/validation.hpp"

namespace cece {

using Json = nlohmann::ordered_json;

// Machine output precision.
inline constexpr int kJsonDigits = 12;

// Rounds to `digits` significant digits; non-finite values pass through
// (they serialize as null).
double round_significant(double value, int digits = kJsonDigits);
// Rounded number, or null when not finite.
Json json_number(double value);

Json to_json(const Interval& interval);
// {estimand, point, ci: [lo, hi], level, method, scale, orientation_swapped,
//  n_per_arm: [control, vaccine], warnings?}
Json to_json(const EstimateWithCI& estimate);
Json to_json(const BoundsEstimate& bounds);
Json to_json(const SensitivityPoint& point);
Json to_json(const ValidationCheck& check);
// No timestamps: identical inputs give identical bytes.
Json to_json(const ValidationReport& report);

std::string dump(const Json& document);

// p_exposure,p_outcome_given_exposure,acece[,ci_lower,ci_upper]
void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityPoint>& points);
// k,arm,at_risk,censored,events,hazard,cum_incidence
void write_incidence_csv(std::ostream& out, const DiscreteEventTable& events, const HazardSeries& hazards,
                         const IncidenceSeries& incidence);
// k,rcece,rcece_lo,rcece_hi,acece_lower,acece_upper
void write_curve_csv(std::ostream& out, const std::vector<RatioCurvePoint>& ratio,
                     const std::vector<BoundsCurvePoint>& bounds);

// %.12g, empty for non-finite.
std::string format_number(double value);

}  // namespace cece
