#include "cece/estimators.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "cece/error.hpp"

namespace cece {

std::string_view to_string(Scale scale) noexcept {
  switch (scale) {
    case Scale::difference: return "difference";
    case Scale::ratio: return "ratio";
    case Scale::fraction: return "fraction";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ArmMoments moments_of(const ArmStats& s) {
  return {s.mean_outcome, s.variance / static_cast<double>(s.n)};
}

std::array<std::size_t, 2> sizes_of(const std::array<ArmStats, 2>& arms) { return {arms[0].n, arms[1].n}; }

void require_nonempty(const std::array<ArmStats, 2>& arms, std::string_view what) {
  for (Arm a : kArms) {
    if (arms[index_of(a)].n == 0) {
      throw PreconditionError(what == "arm" ? "positivity" : "exposure-positivity",
                              std::string(what == "arm" ? "positivity violated: " : "empty stratum-arm cell: ") +
                                  (a == Arm::control ? "no control subjects" : "no vaccine subjects") +
                                  (what == "arm" ? "" : " in " + std::string(what)));
    }
  }
}

// Moments for a ratio estimand, with the optional continuity correction.
std::pair<ArmMoments, ArmMoments> ratio_moments(const std::array<ArmStats, 2>& arms, AnalysisMode mode,
                                                const EstimatorOptions& options, std::vector<std::string>& warnings) {
  const ArmStats& vac = arms[index_of(Arm::vaccine)];
  const ArmStats& ctl = arms[index_of(Arm::control)];
  if (options.continuity_correction && (vac.mean_outcome == 0.0 || ctl.mean_outcome == 0.0)) {
    if (mode != AnalysisMode::binary_point) {
      throw PreconditionError("mode", "continuity correction requires binary outcomes");
    }
    auto corrected = [](const ArmStats& s) {
      const double events = std::round(s.mean_outcome * static_cast<double>(s.n));
      return binomial_moments((events + 0.5) / static_cast<double>(s.n + 1), s.n + 1);
    };
    warnings.emplace_back("continuity-corrected");
    return {corrected(vac), corrected(ctl)};
  }
  return {moments_of(vac), moments_of(ctl)};
}

void check_ratio_denominator(const ArmMoments& m0) {
  if (!(m0.mean > 0.0)) {
    throw PreconditionError("zero-denominator",
                            "relative estimand undefined in-sample: control-arm mean outcome is zero");
  }
}

void require_binary(const ArmSummary& summary, std::string_view what) {
  if (summary.mode != AnalysisMode::binary_point) {
    throw PreconditionError("mode", std::string(what) + " requires a binary outcome (binary-point mode)");
  }
  for (const auto& s : summary.arms) {
    if (s.mean_outcome < 0.0 || s.mean_outcome > 1.0) {
      throw PreconditionError("outcome-range", std::string(what) + " requires arm risks in [0, 1]");
    }
  }
}

EstimateWithCI complement(EstimateWithCI ratio, std::string estimand, Scale scale) {
  EstimateWithCI out = std::move(ratio);
  out.estimand = std::move(estimand);
  out.point = 1.0 - out.point;
  const double lo = 1.0 - out.ci_upper;
  const double hi = 1.0 - out.ci_lower;
  out.ci_lower = lo;
  out.ci_upper = hi;
  out.scale = scale;
  return out;
}

EstimateWithCI lower_bound_estimate(const ArmMoments& hi, const ArmMoments& lo, std::array<std::size_t, 2> n_per_arm,
                                    double level, bool swapped) {
  const Interval diff = difference_ci(hi, lo, level);
  EstimateWithCI lower;
  lower.estimand = "acece_lower";
  lower.point = hi.mean - lo.mean;
  lower.ci_lower = diff.lower;
  lower.ci_upper = diff.upper;
  lower.level = level;
  lower.scale = Scale::difference;
  lower.method = IntervalKind::wald_difference;
  lower.orientation_swapped = swapped;
  lower.n_per_arm = n_per_arm;
  lower.warnings = diff.warnings;
  return lower;
}

}  // namespace

EstimateWithCI ratio_from_moments(std::string estimand, const ArmMoments& m1, const ArmMoments& m0,
                                  std::array<std::size_t, 2> n_per_arm, const IntervalMethod& method) {
  check_ratio_denominator(m0);
  const Interval ci = ratio_ci(m1, m0, method);
  EstimateWithCI out;
  out.estimand = std::move(estimand);
  out.point = m1.mean / m0.mean;
  out.ci_lower = ci.lower;
  out.ci_upper = ci.upper;
  out.ci_bounded = ci.bounded;
  out.level = method.level;
  out.scale = Scale::ratio;
  out.method = method.kind;
  out.n_per_arm = n_per_arm;
  out.warnings = ci.warnings;
  return out;
}

BoundsEstimate bounds_from_moments(const ArmMoments& m1, const ArmMoments& m0, std::array<std::size_t, 2> n_per_arm,
                                   const IntervalMethod& ratio_method) {
  const bool swapped = m0.mean < m1.mean;
  const ArmMoments& hi = swapped ? m1 : m0;  // plays the role of mu(0)
  const ArmMoments& lo = swapped ? m0 : m1;
  if (!(hi.mean > 0.0)) {
    throw PreconditionError("zero-denominator", "upper bound undefined: both arm risks are zero");
  }

  BoundsEstimate out;
  out.orientation_swapped = swapped;

  out.lower = lower_bound_estimate(hi, lo, n_per_arm, ratio_method.level, swapped);
  out.upper = complement(ratio_from_moments("acece_upper", lo, hi, n_per_arm, ratio_method), "acece_upper",
                         Scale::fraction);
  out.upper.orientation_swapped = swapped;
  return out;
}

EstimateWithCI estimate_ate(const ArmSummary& summary, const EstimatorOptions& options) {
  require_nonempty(summary.arms, "arm");
  const ArmMoments m1 = moments_of(summary.arm(Arm::vaccine));
  const ArmMoments m0 = moments_of(summary.arm(Arm::control));
  const Interval ci = difference_ci(m1, m0, options.level);
  EstimateWithCI out;
  out.estimand = "ate";
  out.point = m1.mean - m0.mean;
  out.ci_lower = ci.lower;
  out.ci_upper = ci.upper;
  out.level = options.level;
  out.scale = Scale::difference;
  out.method = IntervalKind::wald_difference;
  out.n_per_arm = sizes_of(summary.arms);
  out.warnings = ci.warnings;
  return out;
}

EstimateWithCI estimate_relative_cece(const ArmSummary& summary, const EstimatorOptions& options) {
  require_nonempty(summary.arms, "arm");
  std::vector<std::string> warnings;
  const auto [m1, m0] = ratio_moments(summary.arms, summary.mode, options, warnings);
  auto out = ratio_from_moments("rcece", m1, m0, sizes_of(summary.arms), {options.ratio_method, options.level});
  out.warnings.insert(out.warnings.end(), warnings.begin(), warnings.end());
  return out;
}

EstimateWithCI estimate_excess_fraction(const ArmSummary& summary, const EstimatorOptions& options) {
  return complement(estimate_relative_cece(summary, options), "excess_fraction", Scale::fraction);
}

BoundsEstimate bound_absolute_cece(const ArmSummary& summary, const EstimatorOptions& options) {
  require_binary(summary, "bounds on the absolute CECE");
  require_nonempty(summary.arms, "arm");
  const IntervalMethod method{options.ratio_method, options.level};
  const ArmMoments raw1 = moments_of(summary.arm(Arm::vaccine));
  const ArmMoments raw0 = moments_of(summary.arm(Arm::control));
  std::vector<std::string> warnings;
  const auto [m1, m0] = ratio_moments(summary.arms, summary.mode, options, warnings);
  if (warnings.empty()) return bounds_from_moments(raw1, raw0, sizes_of(summary.arms), method);

  // Continuity correction touches only the ratio-derived upper bound; the
  // orientation and the lower bound come from the raw risks.
  const bool swapped = raw0.mean < raw1.mean;
  const ArmMoments& num = swapped ? m0 : m1;
  const ArmMoments& den = swapped ? m1 : m0;
  BoundsEstimate out;
  out.orientation_swapped = swapped;
  out.lower = lower_bound_estimate(swapped ? raw1 : raw0, swapped ? raw0 : raw1, sizes_of(summary.arms),
                                   options.level, swapped);
  out.upper = complement(ratio_from_moments("acece_upper", num, den, sizes_of(summary.arms), method), "acece_upper",
                         Scale::fraction);
  out.upper.orientation_swapped = swapped;
  out.upper.warnings.insert(out.upper.warnings.end(), warnings.begin(), warnings.end());
  return out;
}

EstimateWithCI estimate_conditional_cde(const ArmSummary& summary, const StratumKey& stratum,
                                        const EstimatorOptions& options) {
  const StratumSummary& cell = summary.stratum(stratum);
  require_nonempty(cell.arms, "stratum (" + format_stratum(stratum) + ")");
  std::vector<std::string> warnings;
  const auto [m1, m0] = ratio_moments(cell.arms, summary.mode, options, warnings);
  auto out = ratio_from_moments("rcde[" + format_stratum(stratum) + "]", m1, m0, sizes_of(cell.arms),
                                {options.ratio_method, options.level});
  out.warnings.insert(out.warnings.end(), warnings.begin(), warnings.end());
  return out;
}

MarginalCdeEstimate estimate_marginal_cde_deterministic(const ArmSummary& summary, DeterministicExposure assumption,
                                                        const EstimatorOptions& options) {
  if (assumption != DeterministicExposure::asserted) {
    throw PreconditionError("assumption-not-asserted",
                            "marginal CDE requires the deterministic-exposure assumption to be asserted explicitly");
  }
  if (!summary.has_strata()) {
    throw PreconditionError("strata-required", "marginal CDE requires stratum columns");
  }
  const double z = two_sided_z(options.level);

  double point = 0.0;
  double variance = 0.0;
  double weight_total = 0.0;
  std::vector<std::string> warnings;
  for (const auto& cell : summary.strata) {
    require_nonempty(cell.arms, "stratum (" + format_stratum(cell.key) + ")");
    const auto [m1, m0] = ratio_moments(cell.arms, summary.mode, options, warnings);
    check_ratio_denominator(m0);
    const double ratio = m1.mean / m0.mean;
    const double m0sq = m0.mean * m0.mean;
    const double var_ratio = m1.variance_of_mean / m0sq + m1.mean * m1.mean * m0.variance_of_mean / (m0sq * m0sq);
    point += ratio * cell.weight;
    variance += cell.weight * cell.weight * var_ratio;
    weight_total += cell.weight;
  }
  if (std::abs(weight_total - 1.0) > 1e-12) {
    throw PreconditionError("weights", "stratum weights do not sum to one");
  }

  MarginalCdeEstimate out;
  auto& rel = out.relative;
  rel.estimand = "marginal_rcde";
  rel.point = point;
  rel.level = options.level;
  rel.scale = Scale::ratio;
  rel.method = IntervalKind::log_delta_weighted_ratio;
  rel.n_per_arm = sizes_of(summary.arms);
  rel.warnings = warnings;
  if (point > 0.0) {
    const double se_log = std::sqrt(variance) / point;
    rel.ci_lower = std::exp(std::log(point) - z * se_log);
    rel.ci_upper = std::exp(std::log(point) + z * se_log);
  } else {
    rel.ci_lower = 0.0;
    rel.ci_upper = kInf;
    rel.ci_bounded = false;
    rel.warnings.emplace_back("zero-numerator");
  }
  out.absolute_ppe = complement(rel, "marginal_appe", Scale::difference);
  return out;
}

}  // namespace cece
