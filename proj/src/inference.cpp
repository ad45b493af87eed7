#include "cece/inference.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "cece/error.hpp"

namespace cece {

std::string_view to_string(IntervalKind kind) noexcept {
  switch (kind) {
    case IntervalKind::wald_difference: return "wald-difference";
    case IntervalKind::log_delta_ratio: return "log-delta-ratio";
    case IntervalKind::fieller_ratio: return "fieller-ratio";
    case IntervalKind::log_delta_incidence_ratio: return "log-delta-incidence-ratio";
    case IntervalKind::log_delta_weighted_ratio: return "log-delta-weighted-ratio";
  }
  return "?";
}

IntervalKind parse_ratio_method(std::string_view text) {
  if (text == "log-delta" || text == "log-delta-ratio") return IntervalKind::log_delta_ratio;
  if (text == "fieller" || text == "fieller-ratio") return IntervalKind::fieller_ratio;
  throw InputError("ratio-method", "unknown ratio method '" + std::string(text) + "' (expected log-delta or fieller)");
}

namespace {

// Acklam (2003) coefficients.
constexpr std::array<double, 6> kA{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
constexpr std::array<double, 5> kB{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
constexpr std::array<double, 6> kC{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
constexpr std::array<double, 4> kD{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
constexpr double kLow = 0.02425;

double acklam(double p) {
  if (p < kLow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
           ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
  }
  if (p > 1.0 - kLow) return -acklam(1.0 - p);
  const double q = p - 0.5;
  const double r = q * q;
  return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
         (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

bool degenerate(double p) { return p == 0.0 || p == 1.0; }

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw InputError("probability-range", "normal quantile requires p in [0, 1]");
  }
  double x = acklam(p);
  // Halley refinement.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw InputError("level-range", "confidence level must lie in (0, 1)");
}

double two_sided_z(double level) {
  check_level(level);
  return normal_quantile(0.5 * (1.0 + level));
}

ArmMoments binomial_moments(double p, std::size_t n) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("probability-range", "proportion must lie in [0, 1]");
  if (n == 0) throw PreconditionError("positivity", "arm size must be at least 1");
  return {p, p * (1.0 - p) / static_cast<double>(n)};
}

Interval difference_ci(const ArmMoments& m1, const ArmMoments& m0, double level) {
  const double z = two_sided_z(level);
  const double diff = m1.mean - m0.mean;
  const double half = z * std::sqrt(m1.variance_of_mean + m0.variance_of_mean);
  Interval out{diff - half, diff + half, true, {}};
  if (m1.variance_of_mean == 0.0 || m0.variance_of_mean == 0.0) out.warnings.emplace_back("zero-variance-arm");
  return out;
}

Interval difference_ci(double p1, std::size_t n1, double p0, std::size_t n0, double level) {
  Interval out = difference_ci(binomial_moments(p1, n1), binomial_moments(p0, n0), level);
  if (degenerate(p1) || degenerate(p0)) out.warnings.emplace_back("degenerate-proportion");
  return out;
}

namespace {

Interval log_delta(const ArmMoments& m1, const ArmMoments& m0, double level) {
  if (!(m0.mean > 0.0)) {
    throw PreconditionError("zero-denominator", "ratio interval undefined: denominator mean is zero");
  }
  const double z = two_sided_z(level);
  if (m1.mean == 0.0) {
    Interval out{0.0, kInf, false, {}};
    out.warnings.emplace_back("zero-numerator");
    return out;
  }
  const double log_ratio = std::log(m1.mean / m0.mean);
  const double se = std::sqrt(m1.variance_of_mean / (m1.mean * m1.mean) + m0.variance_of_mean / (m0.mean * m0.mean));
  Interval out{std::exp(log_ratio - z * se), std::exp(log_ratio + z * se), true, {}};
  if (m1.variance_of_mean == 0.0 || m0.variance_of_mean == 0.0) out.warnings.emplace_back("zero-variance-arm");
  return out;
}

Interval fieller(const ArmMoments& m1, const ArmMoments& m0, double level) {
  const double z = two_sided_z(level);
  const double z2 = z * z;
  const double a = m0.mean * m0.mean - z2 * m0.variance_of_mean;
  if (!(a > 0.0)) {
    Interval out{-kInf, kInf, false, {}};
    out.warnings.emplace_back("fieller-unbounded");
    return out;
  }
  const double b = -2.0 * m1.mean * m0.mean;
  const double c = m1.mean * m1.mean - z2 * m1.variance_of_mean;
  const double disc = std::max(0.0, b * b - 4.0 * a * c);
  const double root = std::sqrt(disc);
  // Citardauq-style evaluation avoids cancellation in the smaller root.
  const double q = -0.5 * (b - root);  // b <= 0, so q >= 0
  double lo = q > 0.0 ? c / q : 0.0;
  double hi = q / a;
  if (lo > hi) std::swap(lo, hi);
  Interval out{lo, hi, true, {}};
  if (m1.variance_of_mean == 0.0 || m0.variance_of_mean == 0.0) out.warnings.emplace_back("zero-variance-arm");
  return out;
}

}  // namespace

Interval ratio_ci(const ArmMoments& m1, const ArmMoments& m0, const IntervalMethod& method) {
  switch (method.kind) {
    case IntervalKind::log_delta_ratio:
    case IntervalKind::log_delta_incidence_ratio:
    case IntervalKind::log_delta_weighted_ratio:
      return log_delta(m1, m0, method.level);
    case IntervalKind::fieller_ratio:
      if (!(m0.mean > 0.0)) {
        throw PreconditionError("zero-denominator", "ratio interval undefined: denominator mean is zero");
      }
      return fieller(m1, m0, method.level);
    case IntervalKind::wald_difference:
      break;
  }
  throw InputError("interval-method", "wald-difference is not a ratio interval method");
}

Interval ratio_ci(double p1, std::size_t n1, double p0, std::size_t n0, const IntervalMethod& method) {
  Interval out = ratio_ci(binomial_moments(p1, n1), binomial_moments(p0, n0), method);
  if (degenerate(p1) || degenerate(p0)) out.warnings.emplace_back("degenerate-proportion");
  return out;
}

Interval incidence_ratio_ci(const ArmMoments& mu1, const ArmMoments& mu0, double level) {
  if (!(mu1.mean > 0.0) || !(mu0.mean > 0.0)) {
    throw PreconditionError("zero-incidence", "incidence ratio interval requires positive cumulative incidence in both arms");
  }
  return log_delta(mu1, mu0, level);
}

}  // namespace cece
