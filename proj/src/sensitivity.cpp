#include "cece/sensitivity.hpp"

#include <cmath>
#include <string>

#include "cece/error.hpp"

namespace cece {

namespace {

struct Oriented {
  ArmMoments treated;  // plays mu(1)
  ArmMoments control;  // plays mu(0)
  bool swapped = false;
};

Oriented orient(const ArmSummary& summary) {
  if (summary.mode != AnalysisMode::binary_point) {
    throw PreconditionError("mode", "sensitivity analysis requires a binary outcome (binary-point mode)");
  }
  for (Arm a : kArms) {
    if (summary.arm(a).n == 0) {
      throw PreconditionError("positivity", a == Arm::control ? "positivity violated: no control subjects"
                                                              : "positivity violated: no vaccine subjects");
    }
  }
  auto moments = [&](Arm a) {
    const auto& s = summary.arm(a);
    return ArmMoments{s.mean_outcome, s.variance / static_cast<double>(s.n)};
  };
  Oriented o{moments(Arm::vaccine), moments(Arm::control), false};
  if (o.control.mean < o.treated.mean) {
    std::swap(o.treated, o.control);
    o.swapped = true;
  }
  if (!(o.control.mean > 0.0)) {
    throw PreconditionError("zero-denominator", "sensitivity analysis undefined: control-arm risk is zero");
  }
  return o;
}

void check_feasible(double p, double mu0, const char* name) {
  if (!(p >= mu0 && p <= 1.0)) {
    throw PreconditionError("infeasible-parameter",
                            std::string(name) + " = " + std::to_string(p) + " violates " +
                                (p > 1.0 ? std::string(name) + " <= 1" : std::string(name) + " >= mu(0) = " + std::to_string(mu0)) +
                                " (exposure necessity requires P(Y=1|E=1,A=0) * P(E=1|A=0) = mu(0))");
  }
}

Interval symmetric(double centre, double se, double level) {
  const double half = two_sided_z(level) * se;
  return {centre - half, centre + half, true, {}};
}

}  // namespace

SensitivityPoint acece_from_outcome_risk(const ArmSummary& summary, double p_y_given_e,
                                         const SensitivityOptions& options) {
  const Oriented o = orient(summary);
  check_feasible(p_y_given_e, o.control.mean, "P(Y=1|E=1,A=0)");
  const double ratio = o.treated.mean / o.control.mean;
  SensitivityPoint out;
  out.p_outcome_given_exposure = p_y_given_e;
  out.p_exposure = o.control.mean / p_y_given_e;
  out.acece = p_y_given_e * (1.0 - ratio);
  out.orientation_swapped = o.swapped;
  if (options.propagate_sampling_error) {
    // var(p (1 - R)) = p^2 var(R), var(R) by the delta method.
    const double m0sq = o.control.mean * o.control.mean;
    const double var_ratio =
        o.treated.variance_of_mean / m0sq + o.treated.mean * o.treated.mean * o.control.variance_of_mean / (m0sq * m0sq);
    out.ci = symmetric(out.acece, p_y_given_e * std::sqrt(var_ratio), options.level);
  }
  return out;
}

SensitivityPoint acece_from_exposure_risk(const ArmSummary& summary, double p_e, const SensitivityOptions& options) {
  const Oriented o = orient(summary);
  check_feasible(p_e, o.control.mean, "P(E=1|A=0)");
  SensitivityPoint out;
  out.p_exposure = p_e;
  out.p_outcome_given_exposure = o.control.mean / p_e;
  out.acece = o.control.mean / p_e - o.treated.mean / p_e;
  out.orientation_swapped = o.swapped;
  if (options.propagate_sampling_error) {
    out.ci = symmetric(out.acece, std::sqrt(o.treated.variance_of_mean + o.control.variance_of_mean) / p_e,
                       options.level);
  }
  return out;
}

SensitivityCurve sensitivity_sweep(const ArmSummary& summary, std::size_t grid_size, const SensitivityOptions& options,
                                   Execution exec) {
  if (grid_size < 2) throw InputError("grid-size", "sensitivity grid needs at least 2 points");
  const Oriented o = orient(summary);
  const double lo = o.control.mean;
  SensitivityCurve curve;
  curve.source_arms = summary.arms;
  curve.orientation_swapped = o.swapped;
  curve.points.resize(grid_size);
  const double step = (1.0 - lo) / static_cast<double>(grid_size - 1);
  detail::for_each_index(
      grid_size,
      [&](std::size_t i) {
        const double p = i + 1 == grid_size ? 1.0 : lo + step * static_cast<double>(i);
        curve.points[i] = acece_from_exposure_risk(summary, p, options);
      },
      exec);
  return curve;
}

}  // namespace cece
