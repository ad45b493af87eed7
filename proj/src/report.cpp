#include "cece/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>

namespace cece {

double round_significant(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.*g", digits, value);
  return std::strtod(buffer, nullptr);
}

Json json_number(double value) {
  if (!std::isfinite(value)) return nullptr;
  return round_significant(value);
}

std::string format_number(double value) {
  if (!std::isfinite(value)) return {};
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

Json to_json(const Interval& interval) {
  Json j = Json::array({json_number(interval.lower), json_number(interval.upper)});
  return j;
}

Json to_json(const EstimateWithCI& e) {
  Json j;
  j["estimand"] = e.estimand;
  j["point"] = json_number(e.point);
  j["ci"] = Json::array({json_number(e.ci_lower), json_number(e.ci_upper)});
  j["level"] = e.level;
  j["method"] = std::string(to_string(e.method));
  j["scale"] = std::string(to_string(e.scale));
  j["orientation_swapped"] = e.orientation_swapped;
  j["n_per_arm"] = Json::array({e.n_per_arm[0], e.n_per_arm[1]});
  if (!e.ci_bounded) j["ci_bounded"] = false;
  if (!e.warnings.empty()) j["warnings"] = e.warnings;
  return j;
}

Json to_json(const BoundsEstimate& b) {
  Json j;
  j["lower"] = to_json(b.lower);
  j["upper"] = to_json(b.upper);
  j["orientation_swapped"] = b.orientation_swapped;
  return j;
}

Json to_json(const SensitivityPoint& p) {
  Json j;
  j["p_exposure"] = json_number(p.p_exposure);
  j["p_outcome_given_exposure"] = json_number(p.p_outcome_given_exposure);
  j["acece"] = json_number(p.acece);
  j["orientation_swapped"] = p.orientation_swapped;
  if (p.ci) {
    j["ci"] = to_json(*p.ci);
    if (!p.ci->warnings.empty()) j["warnings"] = p.ci->warnings;
  }
  return j;
}

Json to_json(const ValidationCheck& c) {
  Json j;
  j["name"] = c.name;
  j["description"] = c.description;
  j["status"] = std::string(to_string(c.status));
  j["identified"] = json_number(c.identified);
  j["oracle"] = json_number(c.oracle);
  j["discrepancy"] = json_number(c.discrepancy);
  j["standard_error"] = json_number(c.standard_error);
  j["tolerance"] = json_number(c.tolerance);
  j["assumptions_hold"] = c.assumptions_hold;
  j["demonstration"] = c.demonstration;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

Json to_json(const ValidationReport& r) {
  Json j;
  j["status"] = r.passed() ? "pass" : "fail";
  j["n"] = r.config.n;
  j["seed"] = r.config.seed;
  j["violation_demo"] = r.violation_demo;
  j["tolerance_se"] = r.tolerance_se;
  j["assumptions"] = {{"no_effect_on_exposure", r.assumptions.no_effect_on_exposure},
                      {"necessity", r.assumptions.necessity},
                      {"independent_censoring", r.assumptions.independent_censoring}};
  j["summary"] = {{"pass", r.count(CheckStatus::pass)},
                  {"fail", r.count(CheckStatus::fail)},
                  {"expected-fail", r.count(CheckStatus::expected_fail)},
                  {"not-detected", r.count(CheckStatus::not_detected)}};
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  j["checks"] = std::move(checks);
  j["config"] = format_simulation_config(r.config);
  return j;
}

std::string dump(const Json& document) { return document.dump(2) + "\n"; }

void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityPoint>& points) {
  const bool with_ci = !points.empty() && points.front().ci.has_value();
  out << "p_exposure,p_outcome_given_exposure,acece";
  if (with_ci) out << ",ci_lower,ci_upper";
  out << '\n';
  for (const auto& p : points) {
    out << format_number(p.p_exposure) << ',' << format_number(p.p_outcome_given_exposure) << ','
        << format_number(p.acece);
    if (with_ci) out << ',' << format_number(p.ci->lower) << ',' << format_number(p.ci->upper);
    out << '\n';
  }
}

void write_incidence_csv(std::ostream& out, const DiscreteEventTable& events, const HazardSeries& hazards,
                         const IncidenceSeries& incidence) {
  out << "k,arm,at_risk,censored,events,hazard,cum_incidence\n";
  for (int k = 1; k <= events.interval_count; ++k) {
    for (Arm a : kArms) {
      const auto& h = hazards.at(a, k);
      out << k << ',' << index_of(a) << ',' << events.at_risk(a, k) << ',' << events.censored(a, k) << ','
          << events.events(a, k) << ',' << (h.defined ? format_number(h.value) : std::string()) << ','
          << (k <= incidence.horizon[index_of(a)] ? format_number(incidence.at(a, k)) : std::string()) << '\n';
    }
  }
}

void write_curve_csv(std::ostream& out, const std::vector<RatioCurvePoint>& ratio,
                     const std::vector<BoundsCurvePoint>& bounds) {
  out << "k,rcece,rcece_lo,rcece_hi,acece_lower,acece_upper\n";
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    out << ratio[i].k << ',';
    if (ratio[i].estimate) {
      const auto& e = *ratio[i].estimate;
      out << format_number(e.point) << ',' << format_number(e.ci_lower) << ',' << format_number(e.ci_upper);
    } else {
      out << ",,";
    }
    out << ',';
    if (i < bounds.size() && bounds[i].bounds) {
      out << format_number(bounds[i].bounds->lower.point) << ',' << format_number(bounds[i].bounds->upper.point);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

}  // namespace cece
