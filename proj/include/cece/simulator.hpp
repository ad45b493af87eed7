#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cece/parallel.hpp"
#include "cece/trial_data.hpp"

namespace cece {

// Per-interval hazards for the longitudinal data-generating process. Each
// vector holds one value per interval k = 1..K.
struct LongitudinalConfig {
  int intervals = 0;
  // P(E_k = 1 | E_{k-1} = 0) under arm a. Equal across arms unless the
  // no-effect-on-exposure assumption is deliberately violated.
  std::array<std::vector<double>, 2> exposure_hazard{};
  // P(Y_k = 1 | Y_{k-1} = 0, E_k = 1) under arm a.
  std::array<std::vector<double>, 2> outcome_hazard{};
  // P(C_k = 1 | C_{k-1} = 0, Y_{k-1} = 0) given the assigned arm.
  std::array<std::vector<double>, 2> censor_hazard{};
  // Violates independent censoring: probability that a subject whose
  // uncensored event would occur in interval k is censored in k instead.
  std::array<double, 2> informative_censoring{0.0, 0.0};
  // Violates necessity in the longitudinal process: P(Y_k = 1 | Y_{k-1} = 0,
  // E_k = 0). Forced to zero when necessity holds.
  std::array<double, 2> leak_hazard{0.0, 0.0};
};

// Declarative simulation setup. Each identification assumption has exactly
// one knob:
//   no effect on exposure   exposure_prob differs by arm
//   exposure necessity      necessity = false with leak_prob > 0
//   independent censoring   informative_censoring > 0
struct SimulationConfig {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<double> covariate_dist{1.0};  // P(L = l), l = 0..m-1
  double treat_prob = 0.5;
  std::array<std::vector<double>, 2> exposure_prob{};  // P(E^a = 1 | L = l)
  std::array<std::vector<double>, 2> outcome_prob{};   // P(Y^{a,e=1} = 1 | L = l)
  bool necessity = true;
  std::array<std::vector<double>, 2> leak_prob{};  // P(Y^{a,e=0} = 1 | L = l)
  std::optional<LongitudinalConfig> longitudinal;

  std::size_t strata_count() const noexcept { return covariate_dist.size(); }
  bool no_effect_on_exposure() const;
  // Throws InputError naming the offending key.
  void validate() const;
};

// Parses the key = value config format (see README). Scalars broadcast over
// strata or intervals; lists are comma separated.
SimulationConfig parse_simulation_config(std::istream& in, const std::string& source_name = "<config>");
SimulationConfig load_simulation_config(const std::filesystem::path& path);
// Canonical text form; parse_simulation_config(format(c)) reproduces c.
std::string format_simulation_config(const SimulationConfig& config);
// Two-stratum blinded-trial default with a 10-interval longitudinal block.
SimulationConfig default_simulation_config();

// Full potential-outcome row. Longitudinal onsets are first-hit intervals
// (0 = not within K); absorbing sequences are determined by their onsets.
struct CounterfactualRecord {
  std::uint32_t l = 0;
  Arm a = Arm::control;
  std::array<std::uint8_t, 2> e{};     // E^{a}
  std::array<std::uint8_t, 2> y{};     // Y^{a}
  std::array<std::uint8_t, 2> y_e1{};  // Y^{a,e=1}
  std::array<std::uint16_t, 2> exposure_onset{};  // first k with E_k^{a,c=0} = 1
  std::array<std::uint16_t, 2> event_onset{};     // first k with Y_k^{a,c=0} = 1
  std::uint16_t censor_interval = 0;              // observed C onset (0 = never)

  bool exposed_by(Arm arm, int k) const noexcept {
    const auto onset = exposure_onset[index_of(arm)];
    return onset != 0 && onset <= k;
  }
  bool event_by(Arm arm, int k) const noexcept {
    const auto onset = event_onset[index_of(arm)];
    return onset != 0 && onset <= k;
  }
};

struct CounterfactualTable {
  SimulationConfig config;
  std::vector<CounterfactualRecord> records;
  // Consistency projection: E = E^A, Y = Y^A (or the censored sequences).
  SubjectTable observed;
};

// Point-exposure trial: binary-point observed table with e and l1 columns.
CounterfactualTable simulate_point_trial(const SimulationConfig& config, Execution exec = Execution::parallel);

// Longitudinal trial: time-to-event observed table with l1, event_interval,
// censor_interval. Requires config.longitudinal.
CounterfactualTable simulate_survival_trial(const SimulationConfig& config, Execution exec = Execution::parallel);

// Non-differential outcome misclassification with perfect specificity: each
// Y = 1 becomes Y* = 0 with probability 1 - sensitivity, Y = 0 is kept.
SubjectTable misclassify_outcome(const SubjectTable& table, double sensitivity, std::uint64_t seed,
                                 Execution exec = Execution::parallel);

// Extended counterfactual CSV (id,l,a,e0,e1,y0,y1,y0_e1,y1_e1 and, for
// longitudinal tables, onset columns).
void write_counterfactual_table(std::ostream& out, const CounterfactualTable& table);

}  // namespace cece
