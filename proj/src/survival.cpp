#include "cece/survival.hpp"

#include "cece/error.hpp"

namespace cece {

HazardSeries discrete_hazards(const DiscreteEventTable& table) {
  HazardSeries out;
  out.interval_count = table.interval_count;
  for (Arm a : kArms) {
    auto& series = out.arms[index_of(a)];
    out.initial_at_risk[index_of(a)] = table.at_risk(a, 1);
    series.reserve(static_cast<std::size_t>(table.interval_count));
    for (int k = 1; k <= table.interval_count; ++k) {
      HazardEstimate h;
      h.risk_set = table.at_risk(a, k) - table.censored(a, k);
      h.events = table.events(a, k);
      h.defined = h.risk_set > 0;
      h.value = h.defined ? static_cast<double>(h.events) / static_cast<double>(h.risk_set) : 0.0;
      series.push_back(h);
    }
  }
  return out;
}

IncidenceSeries cumulative_incidence(const HazardSeries& hazards) {
  IncidenceSeries out;
  out.interval_count = hazards.interval_count;
  out.initial_at_risk = hazards.initial_at_risk;
  for (Arm a : kArms) {
    const std::size_t arm = index_of(a);
    double survival = 1.0;
    double incidence = 0.0;
    double greenwood = 0.0;  // sum d / (r (r - d))
    int horizon = 0;
    for (const auto& h : hazards.arms[arm]) {
      if (!h.defined) break;
      incidence += h.value * survival;
      survival *= 1.0 - h.value;
      if (h.events < h.risk_set) {
        const double r = static_cast<double>(h.risk_set);
        const double d = static_cast<double>(h.events);
        greenwood += d / (r * (r - d));
      }
      out.incidence[arm].push_back(incidence);
      out.variance[arm].push_back(survival > 0.0 ? survival * survival * greenwood : 0.0);
      ++horizon;
    }
    out.horizon[arm] = horizon;
  }
  return out;
}

double IncidenceSeries::at(Arm a, int k) const {
  const std::size_t arm = index_of(a);
  if (k < 1 || k > interval_count) {
    throw InputError("interval-range", "interval " + std::to_string(k) + " outside 1.." + std::to_string(interval_count));
  }
  if (k > horizon[arm]) {
    throw PreconditionError("undefined-hazard", "cumulative incidence not identified at interval " + std::to_string(k) +
                                                    ": empty risk set at interval " + std::to_string(horizon[arm] + 1));
  }
  return incidence[arm][static_cast<std::size_t>(k - 1)];
}

ArmMoments IncidenceSeries::moments(Arm a, int k) const {
  const double mu = at(a, k);
  return {mu, variance[index_of(a)][static_cast<std::size_t>(k - 1)]};
}

Interval incidence_ratio_ci(const IncidenceSeries& series, int k, double level) {
  return incidence_ratio_ci(series.moments(Arm::vaccine, k), series.moments(Arm::control, k), level);
}

std::vector<RatioCurvePoint> relative_cece_curve(const IncidenceSeries& incidences, double level) {
  check_level(level);
  std::vector<RatioCurvePoint> curve;
  const IntervalMethod method{IntervalKind::log_delta_incidence_ratio, level};
  for (int k = 1; k <= incidences.common_horizon(); ++k) {
    RatioCurvePoint point{k, std::nullopt, {}};
    const ArmMoments m1 = incidences.moments(Arm::vaccine, k);
    const ArmMoments m0 = incidences.moments(Arm::control, k);
    if (m0.mean > 0.0) {
      point.estimate = ratio_from_moments("rcece", m1, m0, incidences.initial_at_risk, method);
    } else {
      point.note = "zero control incidence";
    }
    curve.push_back(std::move(point));
  }
  return curve;
}

std::vector<BoundsCurvePoint> absolute_cece_bounds_curve(const IncidenceSeries& incidences, double level) {
  check_level(level);
  std::vector<BoundsCurvePoint> curve;
  const IntervalMethod method{IntervalKind::log_delta_incidence_ratio, level};
  for (int k = 1; k <= incidences.common_horizon(); ++k) {
    BoundsCurvePoint point{k, std::nullopt, {}};
    const ArmMoments m1 = incidences.moments(Arm::vaccine, k);
    const ArmMoments m0 = incidences.moments(Arm::control, k);
    if (m0.mean > 0.0 || m1.mean > 0.0) {
      point.bounds = bounds_from_moments(m1, m0, incidences.initial_at_risk, method);
    } else {
      point.note = "zero incidence in both arms";
    }
    curve.push_back(std::move(point));
  }
  return curve;
}

}  // namespace cece
