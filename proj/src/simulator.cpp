#include "cece/simulator.hpp"

#include <ostream>
#include <string>

#include "cece/error.hpp"
#include "cece/rng.hpp"

namespace cece {

namespace {

std::uint32_t draw_stratum(SubjectStream& rng, const std::vector<double>& dist) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t l = 0; l + 1 < dist.size(); ++l) {
    cumulative += dist[l];
    if (u < cumulative) return static_cast<std::uint32_t>(l);
  }
  return static_cast<std::uint32_t>(dist.size() - 1);
}

std::string subject_id(std::size_t i) { return "s" + std::to_string(i + 1); }

CounterfactualRecord draw_point_subject(const SimulationConfig& c, std::size_t i) {
  SubjectStream rng(c.seed, RngDomain::point_trial, i);
  CounterfactualRecord r;
  r.l = draw_stratum(rng, c.covariate_dist);
  r.a = rng.bernoulli(c.treat_prob) ? Arm::vaccine : Arm::control;
  // Shared uniforms across arms: E^a = [u_e < P(E^a | l)], Y^{a,e=1} = [u_y < P(Y^{a,e=1} | l)].
  const double u_e = rng.uniform();
  const double u_y = rng.uniform();
  const double u_leak = rng.uniform();
  for (std::size_t a = 0; a < 2; ++a) {
    r.e[a] = u_e < c.exposure_prob[a][r.l];
    r.y_e1[a] = u_y < c.outcome_prob[a][r.l];
    const bool y_e0 = !c.necessity && u_leak < c.leak_prob[a][r.l];
    r.y[a] = r.e[a] ? r.y_e1[a] : y_e0;
  }
  return r;
}

// Per interval: u_exposure, u_outcome, u_censor, u_informative.
CounterfactualRecord draw_survival_subject(const SimulationConfig& c, std::size_t i) {
  const LongitudinalConfig& lon = *c.longitudinal;
  SubjectStream rng(c.seed, RngDomain::survival_trial, i);
  CounterfactualRecord r;
  r.l = draw_stratum(rng, c.covariate_dist);
  r.a = rng.bernoulli(c.treat_prob) ? Arm::vaccine : Arm::control;
  const std::size_t assigned = index_of(r.a);

  bool censored = false;
  for (int k = 1; k <= lon.intervals; ++k) {
    const auto kk = static_cast<std::size_t>(k - 1);
    const double u_exposure = rng.uniform();
    const double u_outcome = rng.uniform();
    const double u_censor = rng.uniform();
    const double u_informative = rng.uniform();
    for (std::size_t a = 0; a < 2; ++a) {
      // Order within the interval: exposure, then outcome.
      if (r.exposure_onset[a] == 0 && u_exposure < lon.exposure_hazard[a][kk]) {
        r.exposure_onset[a] = static_cast<std::uint16_t>(k);
      }
      if (r.event_onset[a] == 0) {
        const bool exposed = r.exposure_onset[a] != 0;
        const double hazard = exposed ? lon.outcome_hazard[a][kk] : (c.necessity ? 0.0 : lon.leak_hazard[a]);
        if (u_outcome < hazard) r.event_onset[a] = static_cast<std::uint16_t>(k);
      }
    }
    // Censoring for the assigned arm precedes its outcome in interval k.
    const auto onset = r.event_onset[assigned];
    if (!censored && (onset == 0 || onset >= k)) {
      const bool informative = onset == k && u_informative < lon.informative_censoring[assigned];
      if (u_censor < lon.censor_hazard[assigned][kk] || informative) {
        r.censor_interval = static_cast<std::uint16_t>(k);
        censored = true;
      }
    }
  }
  for (std::size_t a = 0; a < 2; ++a) {
    r.e[a] = r.exposure_onset[a] != 0;
    r.y[a] = r.event_onset[a] != 0;
    r.y_e1[a] = r.y[a];
  }
  return r;
}

}  // namespace

CounterfactualTable simulate_point_trial(const SimulationConfig& config, Execution exec) {
  config.validate();
  std::vector<CounterfactualRecord> records(config.n);
  std::vector<SubjectRecord> observed(config.n);
  detail::for_each_index(
      config.n,
      [&](std::size_t i) {
        records[i] = draw_point_subject(config, i);
        const auto& cf = records[i];
        const std::size_t a = index_of(cf.a);
        auto& obs = observed[i];
        obs.id = subject_id(i);
        obs.arm = cf.a;
        obs.outcome = cf.y[a];
        obs.exposure = cf.e[a];
        obs.strata = {static_cast<int>(cf.l)};
        obs.source_line = i + 2;
      },
      exec);
  SchemaFlags schema;
  schema.exposure = true;
  schema.strata_columns = 1;
  TableOptions options;
  options.mode = AnalysisMode::binary_point;
  options.necessity_consistent = config.necessity;
  options.source_name = "<simulated>";
  auto table = SubjectTable::create(std::move(observed), schema, options);
  return CounterfactualTable{config, std::move(records), std::move(table)};
}

CounterfactualTable simulate_survival_trial(const SimulationConfig& config, Execution exec) {
  config.validate();
  if (!config.longitudinal) throw InputError("config-longitudinal", "survival simulation requires 'intervals'");
  const int K = config.longitudinal->intervals;
  std::vector<CounterfactualRecord> records(config.n);
  std::vector<SubjectRecord> observed(config.n);
  detail::for_each_index(
      config.n,
      [&](std::size_t i) {
        records[i] = draw_survival_subject(config, i);
        const auto& cf = records[i];
        auto& obs = observed[i];
        obs.id = subject_id(i);
        obs.arm = cf.a;
        obs.strata = {static_cast<int>(cf.l)};
        obs.source_line = i + 2;
        const auto onset = cf.event_onset[index_of(cf.a)];
        if (cf.censor_interval != 0) {
          obs.censor_interval = cf.censor_interval;
        } else if (onset != 0) {
          obs.event_interval = onset;
          obs.outcome = 1.0;
        }
      },
      exec);
  SchemaFlags schema;
  schema.strata_columns = 1;
  schema.event_interval = true;
  schema.censor_interval = true;
  TableOptions options;
  options.mode = AnalysisMode::time_to_event;
  options.interval_count = K;
  options.source_name = "<simulated>";
  auto table = SubjectTable::create(std::move(observed), schema, options);
  return CounterfactualTable{config, std::move(records), std::move(table)};
}

SubjectTable misclassify_outcome(const SubjectTable& table, double sensitivity, std::uint64_t seed, Execution exec) {
  if (table.mode() != AnalysisMode::binary_point) {
    throw PreconditionError("mode", "misclassification requires binary-point mode");
  }
  if (!(sensitivity > 0.0 && sensitivity <= 1.0)) {
    throw InputError("sensitivity-range", "misclassification sensitivity must lie in (0, 1]");
  }
  const auto source = table.records();
  std::vector<SubjectRecord> records(source.begin(), source.end());
  detail::for_each_index(
      records.size(),
      [&](std::size_t i) {
        if (records[i].outcome != 1.0) return;  // perfect specificity
        SubjectStream rng(seed, RngDomain::misclassification, i);
        if (!rng.bernoulli(sensitivity)) records[i].outcome = 0.0;
      },
      exec);
  TableOptions options;
  options.mode = table.mode();
  options.source_name = "<misclassified>";
  return SubjectTable::create(std::move(records), table.schema(), options);
}

void write_counterfactual_table(std::ostream& out, const CounterfactualTable& table) {
  const bool longitudinal = table.config.longitudinal.has_value();
  out << "id,l,a,e0,e1,y0,y1,y0_e1,y1_e1";
  if (longitudinal) out << ",exposure_onset0,exposure_onset1,event_onset0,event_onset1,censor_interval";
  out << '\n';
  std::string row;
  for (std::size_t i = 0; i < table.records.size(); ++i) {
    const auto& r = table.records[i];
    row = subject_id(i);
    row += ',' + std::to_string(r.l) + ',' + std::to_string(index_of(r.a));
    for (auto v : {r.e[0], r.e[1], r.y[0], r.y[1], r.y_e1[0], r.y_e1[1]}) row += ',' + std::to_string(v);
    if (longitudinal) {
      for (auto v : {r.exposure_onset[0], r.exposure_onset[1], r.event_onset[0], r.event_onset[1], r.censor_interval}) {
        row += ',' + std::to_string(v);
      }
    }
    out << row << '\n';
  }
}

}  // namespace cece
