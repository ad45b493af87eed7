#include "cece/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "cece/error.hpp"

namespace cece {

namespace {

// Binary potential outcomes Y^1 over set S1 and Y^0 over set S0 (possibly the
// same set). All sums are integer counts, so reductions are exact.
struct ContrastCounts {
  std::size_t s1 = 0, sum1 = 0;
  std::size_t s0 = 0, sum0 = 0;
  std::size_t both = 0, both_sum1 = 0, both_sum0 = 0, both_sum10 = 0;

  void add(bool in1, bool y1, bool in0, bool y0) noexcept {
    s1 += in1;
    sum1 += in1 && y1;
    s0 += in0;
    sum0 += in0 && y0;
    if (in1 && in0) {
      ++both;
      both_sum1 += y1;
      both_sum0 += y0;
      both_sum10 += y1 && y0;
    }
  }

  void merge(const ContrastCounts& o) noexcept {
    s1 += o.s1;
    sum1 += o.sum1;
    s0 += o.s0;
    sum0 += o.sum0;
    both += o.both;
    both_sum1 += o.both_sum1;
    both_sum0 += o.both_sum0;
    both_sum10 += o.both_sum10;
  }

  struct Moments {
    double m1, m0, var1, var0, cov;
  };

  Moments moments() const {
    const double n1 = static_cast<double>(s1);
    const double n0 = static_cast<double>(s0);
    Moments m{};
    m.m1 = static_cast<double>(sum1) / n1;
    m.m0 = static_cast<double>(sum0) / n0;
    m.var1 = m.m1 * (1.0 - m.m1) / n1;
    m.var0 = m.m0 * (1.0 - m.m0) / n0;
    // Cov(m1, m0) from subjects in both sets.
    const double cross = static_cast<double>(both_sum10) - m.m1 * static_cast<double>(both_sum0) -
                         m.m0 * static_cast<double>(both_sum1) + static_cast<double>(both) * m.m1 * m.m0;
    m.cov = cross / (n1 * n0);
    return m;
  }

  std::size_t support() const noexcept { return s1 < s0 ? s1 : s0; }

  OracleValue ratio() const {
    OracleValue out;
    out.support = support();
    if (s1 == 0 || s0 == 0 || sum0 == 0) return out;
    const auto m = moments();
    const double r = m.m1 / m.m0;
    out.value = r;
    out.standard_error = std::sqrt(std::max(0.0, m.var1 - 2.0 * r * m.cov + r * r * m.var0)) / m.m0;
    return out;
  }

  // m0 - m1
  OracleValue difference() const {
    OracleValue out;
    out.support = support();
    if (s1 == 0 || s0 == 0) return out;
    const auto m = moments();
    out.value = m.m0 - m.m1;
    out.standard_error = std::sqrt(std::max(0.0, m.var0 + m.var1 - 2.0 * m.cov));
    return out;
  }

  double mean1() const { return s1 ? static_cast<double>(sum1) / static_cast<double>(s1) : 0.0; }
  double mean0() const { return s0 ? static_cast<double>(sum0) / static_cast<double>(s0) : 0.0; }
};

OracleValue negate(OracleValue v) {
  if (v.value) v.value = -*v.value;
  return v;
}

OracleValue proportion(std::size_t events, std::size_t total) {
  OracleValue out;
  out.support = total;
  if (total == 0) return out;
  const double p = static_cast<double>(events) / static_cast<double>(total);
  out.value = p;
  out.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(total));
  return out;
}

enum PointSlot : std::size_t { kCece, kPse, kNaive, kAll, kCde, kObserved, kFixedSlots };

}  // namespace

PointOracleReport oracle_point_effects(const CounterfactualTable& table, Execution exec) {
  const auto& records = table.records;
  if (records.empty()) throw InputError("empty-input", "counterfactual table has no records");
  const std::size_t strata = table.config.strata_count();

  const std::vector<ContrastCounts> init(kFixedSlots + strata);
  const auto acc = detail::blocked_reduce(
      records.size(), init,
      [&](std::size_t begin, std::size_t end, std::vector<ContrastCounts>& c) {
        for (std::size_t i = begin; i < end; ++i) {
          const auto& r = records[i];
          const bool observed_e = r.e[index_of(r.a)];
          c[kCece].add(observed_e, r.y[1], observed_e, r.y[0]);
          const bool always = r.e[0] && r.e[1];
          c[kPse].add(always, r.y[1], always, r.y[0]);
          c[kNaive].add(r.e[1], r.y[1], r.e[0], r.y[0]);
          c[kAll].add(true, r.y[1], true, r.y[0]);
          c[kCde].add(true, r.y_e1[1], true, r.y_e1[0]);
          // Observed E(Y | E=1, A=a): slot 1 holds A=1, slot 0 holds A=0.
          const bool y_obs = r.y[index_of(r.a)];
          c[kObserved].add(observed_e && r.a == Arm::vaccine, y_obs, observed_e && r.a == Arm::control, y_obs);
          c[kFixedSlots + r.l].add(true, r.y_e1[1], true, r.y_e1[0]);
        }
      },
      [](std::vector<ContrastCounts>& into, const std::vector<ContrastCounts>& p) {
        for (std::size_t s = 0; s < into.size(); ++s) into[s].merge(p[s]);
      },
      exec);

  PointOracleReport report;
  report.relative_cece = acc[kCece].ratio();
  report.absolute_cece = acc[kCece].difference();
  report.relative_pse = acc[kPse].ratio();
  report.absolute_pse = acc[kPse].difference();
  report.relative_naive = acc[kNaive].ratio();
  report.absolute_naive = acc[kNaive].difference();
  report.relative_ate = acc[kAll].ratio();
  report.ate = negate(acc[kAll].difference());
  report.relative_marginal_cde = acc[kCde].ratio();
  for (std::size_t l = 0; l < strata; ++l) report.relative_conditional_cde.push_back(acc[kFixedSlots + l].ratio());
  const auto& obs = acc[kObserved];
  report.observed_risk_given_exposed[index_of(Arm::vaccine)] = proportion(obs.sum1, obs.s1);
  report.observed_risk_given_exposed[index_of(Arm::control)] = proportion(obs.sum0, obs.s0);
  return report;
}

SurvivalOracleReport oracle_survival_effects(const CounterfactualTable& table, int k, Execution exec) {
  if (!table.config.longitudinal) {
    throw InputError("config-longitudinal", "survival oracle requires a longitudinal counterfactual table");
  }
  if (k < 1 || k > table.config.longitudinal->intervals) {
    throw InputError("interval-range", "oracle interval outside 1..K");
  }
  const auto& records = table.records;
  const std::vector<ContrastCounts> init(2);
  const auto acc = detail::blocked_reduce(
      records.size(), init,
      [&](std::size_t begin, std::size_t end, std::vector<ContrastCounts>& c) {
        for (std::size_t i = begin; i < end; ++i) {
          const auto& r = records[i];
          c[0].add(r.exposed_by(Arm::vaccine, k), r.event_by(Arm::vaccine, k), r.exposed_by(Arm::control, k),
                   r.event_by(Arm::control, k));
          c[1].add(true, r.event_by(Arm::vaccine, k), true, r.event_by(Arm::control, k));
        }
      },
      [](std::vector<ContrastCounts>& into, const std::vector<ContrastCounts>& p) {
        into[0].merge(p[0]);
        into[1].merge(p[1]);
      },
      exec);

  SurvivalOracleReport report;
  report.k = k;
  report.relative_cece = acc[0].ratio();
  report.absolute_cece = acc[0].difference();
  report.relative_ate = acc[1].ratio();
  report.ate = negate(acc[1].difference());
  report.risk[index_of(Arm::vaccine)] = acc[1].mean1();
  report.risk[index_of(Arm::control)] = acc[1].mean0();
  return report;
}

}  // namespace cece
