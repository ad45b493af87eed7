#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cece {

enum class IntervalKind {
  wald_difference,
  log_delta_ratio,
  fieller_ratio,
  log_delta_incidence_ratio,
  log_delta_weighted_ratio,
};

std::string_view to_string(IntervalKind kind) noexcept;
IntervalKind parse_ratio_method(std::string_view text);

struct IntervalMethod {
  IntervalKind kind = IntervalKind::log_delta_ratio;
  double level = 0.95;
};

// Two-sided interval. `bounded` is false when the construction has no finite
// limits (Fieller with a denominator indistinguishable from zero, log-delta
// with a zero numerator); the missing limits are then +/- infinity.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool bounded = true;
  std::vector<std::string> warnings;

  bool contains(double x) const noexcept { return lower <= x && x <= upper; }
  double width() const noexcept { return upper - lower; }
};

// Inverse standard-normal CDF. Acklam's rational approximation followed by
// one Halley step against std::erfc; absolute error below 1e-12 on
// [1e-300, 1 - 1e-16].
double normal_quantile(double p);

// z such that P(|Z| <= z) = level.
double two_sided_z(double level);

// Throws InputError unless 0 < level < 1.
void check_level(double level);

// An estimated mean together with the sampling variance of that estimate.
struct ArmMoments {
  double mean = 0.0;
  double variance_of_mean = 0.0;
};

// p(1 - p) / n.
ArmMoments binomial_moments(double p, std::size_t n);

// Wald interval for p1 - p0.
Interval difference_ci(const ArmMoments& m1, const ArmMoments& m0, double level);
Interval difference_ci(double p1, std::size_t n1, double p0, std::size_t n0, double level);

// Interval for p1 / p0. log-delta:
//   exp(log(p1/p0) +/- z sqrt(v1/p1^2 + v0/p0^2))
// Fieller: roots of (p0^2 - z^2 v0) R^2 - 2 p1 p0 R + (p1^2 - z^2 v1) = 0,
// unbounded when p0^2 <= z^2 v0.
Interval ratio_ci(const ArmMoments& m1, const ArmMoments& m0, const IntervalMethod& method);
Interval ratio_ci(double p1, std::size_t n1, double p0, std::size_t n0, const IntervalMethod& method);

// Log-scale delta interval for a ratio of cumulative incidences with
// var(log mu) = var(mu) / mu^2 (variances from Greenwood's formula).
Interval incidence_ratio_ci(const ArmMoments& mu1, const ArmMoments& mu0, double level);

}  // namespace cece
