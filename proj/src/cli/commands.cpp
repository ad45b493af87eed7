#include "cece/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cece/error.hpp"
#include "cece/estimators.hpp"
#include "cece/manifest.hpp"
#include "cece/report.hpp"
#include "cece/sensitivity.hpp"
#include "cece/simulator.hpp"
#include "cece/survival.hpp"
#include "cece/trial_data.hpp"
#include "cece/validation.hpp"

#ifndef CECE_VERSION
#define CECE_VERSION "dev"
#endif

namespace cece {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  double level = 0.95;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string format = "json";
};

// Either a subject-level file or published arm aggregates.
struct DataSource {
  std::string input;
  std::string mode = "point";
  std::optional<int> intervals;
  std::optional<double> mu1, mu0;
  std::optional<std::size_t> n1, n0;

  bool aggregate() const { return mu1 || mu0 || n1 || n0; }
};

struct EstimateOptions {
  DataSource data;
  std::string ratio_method = "log-delta";
  bool continuity_correction = false;
  bool deterministic_exposure = false;
};

struct SensitivityArgs {
  DataSource data;
  std::optional<double> p_exposure;
  std::optional<double> p_outcome;
  std::optional<std::size_t> grid;
  bool with_ci = false;
};

struct SimulateArgs {
  std::string config;
  std::optional<std::size_t> n;
  bool survival = false;
};

struct ValidateArgs {
  std::string config;
  std::optional<std::size_t> n;
  bool violation_demo = false;
};

// Output directory, manifest bookkeeping and provenance stamping.
class Run {
 public:
  Run(const GlobalOptions& globals, std::vector<std::string> arguments) : dir_(globals.out_dir) {
    manifest_.arguments = std::move(arguments);
    manifest_.version = CECE_VERSION;
    manifest_.seed = globals.seed;
    manifest_.started_at = utc_timestamp();
  }

  void add_input(const std::string& path) { manifest_.inputs.push_back({path, file_sha256(path)}); }
  void set_seed(std::uint64_t seed) { manifest_.seed = seed; }
  std::string run_id() const { return manifest_.run_id(); }

  Json stamp(Json document) const {
    Json out;
    out["run_id"] = run_id();
    out["manifest"] = std::string(kManifestName);
    for (auto& [key, value] : document.items()) out[key] = std::move(value);
    return out;
  }

  std::string csv_header() const {
    return "# run_id=" + run_id() + " manifest=" + std::string(kManifestName) + "\n";
  }

  void write(const std::string& name, const std::string& content) {
    ensure_dir();
    atomic_write(dir_ / name, content);
    manifest_.outputs.push_back(name);
  }

  void finish() {
    ensure_dir();
    manifest_.finished_at = utc_timestamp();
    atomic_write(dir_ / kManifestName, dump(to_json(manifest_)));
  }

 private:
  void ensure_dir() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw InputError("unwritable-output", "cannot create output directory " + dir_.string());
  }

  fs::path dir_;
  RunManifest manifest_;
};

void require_format(const std::string& format) {
  if (format != "json" && format != "csv") throw InputError("format", "--format must be json or csv");
}

ArmSummary load_summary(const DataSource& d, Run& run, AnalysisMode* mode_out = nullptr) {
  if (d.aggregate()) {
    if (!d.input.empty()) throw InputError("arguments", "--input cannot be combined with --mu1/--mu0/--n1/--n0");
    if (!(d.mu1 && d.mu0 && d.n1 && d.n0)) {
      throw InputError("arguments", "aggregate input needs all of --mu1 --mu0 --n1 --n0");
    }
    if (mode_out) *mode_out = AnalysisMode::binary_point;
    return ArmSummary::from_aggregates(*d.mu1, *d.n1, *d.mu0, *d.n0);
  }
  if (d.input.empty()) throw InputError("arguments", "either --input or --mu1 --mu0 --n1 --n0 is required");
  TableOptions options;
  options.mode = parse_mode(d.mode);
  options.interval_count = d.intervals;
  options.source_name = d.input;
  if (options.mode == AnalysisMode::time_to_event) {
    throw InputError("mode", "time-to-event input: use the survival subcommand");
  }
  run.add_input(d.input);
  const SubjectTable table = load_subject_table(fs::path(d.input), options);
  if (mode_out) *mode_out = table.mode();
  return summarize_arms(table);
}

Json arm_json(const ArmSummary& s) {
  Json j;
  for (Arm a : kArms) {
    j[a == Arm::control ? "control" : "vaccine"] = {{"n", s.arm(a).n}, {"mean", json_number(s.mean(a))}};
  }
  return j;
}

void csv_row(std::ostringstream& out, const EstimateWithCI& e, const std::string& estimand) {
  out << estimand << ',' << format_number(e.point) << ',' << format_number(e.ci_lower) << ','
      << format_number(e.ci_upper) << ',' << format_number(e.level) << ',' << to_string(e.method) << ','
      << to_string(e.scale) << '\n';
}

int cmd_estimate(const GlobalOptions& g, const EstimateOptions& o, Run& run, std::ostream& out) {
  require_format(g.format);
  check_level(g.level);
  EstimatorOptions options;
  options.level = g.level;
  options.ratio_method = parse_ratio_method(o.ratio_method);
  options.continuity_correction = o.continuity_correction;

  AnalysisMode mode = AnalysisMode::binary_point;
  const ArmSummary summary = load_summary(o.data, run, &mode);

  Json estimates;
  std::ostringstream csv;
  csv << "estimand,point,ci_lower,ci_upper,level,method,scale\n";
  Json notes = Json::array();

  const EstimateWithCI ate = estimate_ate(summary, options);
  estimates["ate"] = to_json(ate);
  csv_row(csv, ate, "ate");
  const EstimateWithCI rcece = estimate_relative_cece(summary, options);
  estimates["rcece"] = to_json(rcece);
  csv_row(csv, rcece, "rcece");
  if (summary.mode == AnalysisMode::binary_point) {
    const BoundsEstimate bounds = bound_absolute_cece(summary, options);
    estimates["acece_bounds"] = to_json(bounds);
    csv_row(csv, bounds.lower, "acece_lower");
    csv_row(csv, bounds.upper, "acece_upper");
  } else {
    notes.push_back("absolute CECE bounds require a binary outcome");
  }
  const EstimateWithCI ef = estimate_excess_fraction(summary, options);
  estimates["excess_fraction"] = to_json(ef);
  csv_row(csv, ef, "excess_fraction");

  if (summary.has_strata()) {
    Json cdes = Json::array();
    for (const auto& s : summary.strata) {
      try {
        const EstimateWithCI cde = estimate_conditional_cde(summary, s.key, options);
        Json entry = to_json(cde);
        entry["stratum"] = s.key;
        entry["weight"] = json_number(s.weight);
        cdes.push_back(std::move(entry));
        csv_row(csv, cde, cde.estimand);
      } catch (const PreconditionError& e) {
        notes.push_back("stratum " + format_stratum(s.key) + ": " + e.what());
      }
    }
    estimates["conditional_cde"] = std::move(cdes);
    if (o.deterministic_exposure) {
      const auto marginal = estimate_marginal_cde_deterministic(summary, DeterministicExposure::asserted, options);
      estimates["marginal_cde"] = {{"relative", to_json(marginal.relative)},
                                   {"absolute_ppe", to_json(marginal.absolute_ppe)}};
      csv_row(csv, marginal.relative, marginal.relative.estimand);
      csv_row(csv, marginal.absolute_ppe, marginal.absolute_ppe.estimand);
    }
  } else if (o.deterministic_exposure) {
    notes.push_back("marginal CDE needs stratum columns");
  }

  Json doc;
  doc["mode"] = std::string(to_string(mode));
  doc["source"] = o.data.aggregate() ? "aggregate" : "subject-level";
  doc["level"] = g.level;
  doc["arms"] = arm_json(summary);
  doc["estimates"] = std::move(estimates);
  if (!notes.empty()) doc["notes"] = std::move(notes);

  if (g.format == "csv") {
    const std::string text = run.csv_header() + csv.str();
    run.write("estimate.csv", text);
    out << text;
  } else {
    const std::string text = dump(run.stamp(std::move(doc)));
    run.write("estimate.json", text);
    out << text;
  }
  return kExitOk;
}

int cmd_sensitivity(const GlobalOptions& g, const SensitivityArgs& o, Run& run, std::ostream& out) {
  require_format(g.format);
  check_level(g.level);
  const int chosen = int(o.p_exposure.has_value()) + int(o.p_outcome.has_value()) + int(o.grid.has_value());
  if (chosen != 1) throw InputError("arguments", "give exactly one of --p-exposure, --p-outcome, --grid");
  const ArmSummary summary = load_summary(o.data, run);
  SensitivityOptions options;
  options.propagate_sampling_error = o.with_ci;
  options.level = g.level;

  std::vector<SensitivityPoint> points;
  if (o.p_exposure) {
    points.push_back(acece_from_exposure_risk(summary, *o.p_exposure, options));
  } else if (o.p_outcome) {
    points.push_back(acece_from_outcome_risk(summary, *o.p_outcome, options));
  } else {
    points = sensitivity_sweep(summary, *o.grid, options).points;
  }

  if (g.format == "csv") {
    std::ostringstream csv;
    write_sensitivity_csv(csv, points);
    const std::string text = run.csv_header() + csv.str();
    run.write("sensitivity.csv", text);
    out << text;
  } else {
    Json doc;
    doc["level"] = g.level;
    doc["arms"] = arm_json(summary);
    Json list = Json::array();
    for (const auto& p : points) list.push_back(to_json(p));
    doc["points"] = std::move(list);
    const std::string text = dump(run.stamp(std::move(doc)));
    run.write("sensitivity.json", text);
    out << text;
  }
  return kExitOk;
}

int cmd_survival(const GlobalOptions& g, const DataSource& d, Run& run, std::ostream& out, std::ostream& err) {
  require_format(g.format);
  check_level(g.level);
  if (d.input.empty()) throw InputError("arguments", "--input is required");
  TableOptions options;
  options.mode = AnalysisMode::time_to_event;
  options.interval_count = d.intervals;
  options.source_name = d.input;
  run.add_input(d.input);
  const SubjectTable table = load_subject_table(fs::path(d.input), options);
  const DiscreteEventTable events = build_event_table(table);
  const HazardSeries hazards = discrete_hazards(events);
  const IncidenceSeries incidence = cumulative_incidence(hazards);
  const auto ratio = relative_cece_curve(incidence, g.level);
  const auto bounds = absolute_cece_bounds_curve(incidence, g.level);

  Json warnings = Json::array();
  const int K = incidence.interval_count;
  if (incidence.common_horizon() < K) {
    const std::string w = "hazard undefined at interval " + std::to_string(incidence.common_horizon() + 1) +
                          " (empty risk set); curves truncated at k=" + std::to_string(incidence.common_horizon());
    warnings.push_back(w);
    err << "warning: " << w << '\n';
  }

  std::ostringstream incidence_csv, curve_csv;
  write_incidence_csv(incidence_csv, events, hazards, incidence);
  write_curve_csv(curve_csv, ratio, bounds);
  run.write("survival_incidence.csv", run.csv_header() + incidence_csv.str());
  run.write("survival_curve.csv", run.csv_header() + curve_csv.str());

  if (g.format == "json") {
    Json doc;
    doc["level"] = g.level;
    doc["interval_count"] = K;
    doc["horizon"] = {incidence.horizon[0], incidence.horizon[1]};
    Json curve = Json::array();
    for (std::size_t i = 0; i < ratio.size(); ++i) {
      Json point;
      point["k"] = ratio[i].k;
      point["mu"] = {json_number(incidence.at(Arm::control, ratio[i].k)),
                     json_number(incidence.at(Arm::vaccine, ratio[i].k))};
      point["rcece"] = ratio[i].estimate ? to_json(*ratio[i].estimate) : Json(nullptr);
      point["acece_bounds"] = bounds[i].bounds ? to_json(*bounds[i].bounds) : Json(nullptr);
      if (!ratio[i].note.empty()) point["note"] = ratio[i].note;
      curve.push_back(std::move(point));
    }
    doc["curve"] = std::move(curve);
    if (!warnings.empty()) doc["warnings"] = std::move(warnings);
    const std::string text = dump(run.stamp(std::move(doc)));
    run.write("survival.json", text);
    out << text;
  } else {
    out << run.csv_header() << curve_csv.str();
  }
  return kExitOk;
}

SimulationConfig load_config(const std::string& path, Run& run) {
  if (path.empty()) return default_simulation_config();
  run.add_input(path);
  return load_simulation_config(path);
}

int cmd_simulate(const GlobalOptions& g, const SimulateArgs& o, Run& run, std::ostream& out) {
  SimulationConfig config = load_config(o.config, run);
  if (o.n) config.n = *o.n;
  if (g.seed) config.seed = *g.seed;
  run.set_seed(config.seed);
  const bool survival = o.survival;
  if (survival && !config.longitudinal) throw InputError("config-longitudinal", "--survival needs 'intervals' in the config");
  const CounterfactualTable table = survival ? simulate_survival_trial(config) : simulate_point_trial(config);

  std::ostringstream counterfactual, observed;
  write_counterfactual_table(counterfactual, table);
  write_subject_table(observed, table.observed);
  run.write("counterfactual.csv", run.csv_header() + counterfactual.str());
  run.write("observed.csv", run.csv_header() + observed.str());
  run.write("simulation_config.txt", "# run_id=" + run.run_id() + " manifest=" + std::string(kManifestName) + "\n" +
                                         format_simulation_config(config));

  Json doc;
  doc["kind"] = survival ? "survival" : "point";
  doc["n"] = config.n;
  doc["seed"] = config.seed;
  doc["outputs"] = {"counterfactual.csv", "observed.csv", "simulation_config.txt"};
  out << dump(run.stamp(std::move(doc)));
  return kExitOk;
}

int cmd_validate(const GlobalOptions& g, const ValidateArgs& o, Run& run, std::ostream& out, std::ostream& err) {
  const SimulationConfig config = load_config(o.config, run);
  ValidationOptions options;
  options.n = o.n;
  options.seed = g.seed;
  options.violation_demo = o.violation_demo;
  const ValidationReport report = run_validation(config, options);
  run.set_seed(report.config.seed);
  const std::string text = dump(run.stamp(to_json(report)));
  run.write("validation.json", text);
  out << text;
  if (report.passed()) return kExitOk;
  Json error = {{"error", {{"type", "validation"},
                           {"rule", "oracle-check"},
                           {"message", std::to_string(report.count(CheckStatus::fail)) + " check(s) failed, " +
                                           std::to_string(report.count(CheckStatus::expected_fail)) +
                                           " assumption violation(s) detected"}}},
                {"exit_code", int(kExitValidation)}};
  err << error.dump() << '\n';
  return kExitValidation;
}

void add_data_options(CLI::App* cmd, DataSource& d, bool aggregates) {
  cmd->add_option("--input", d.input, "subject-level CSV");
  cmd->add_option("--intervals", d.intervals, "number of discrete intervals K (time-to-event)")->check(CLI::PositiveNumber);
  if (aggregates) {
    cmd->add_option("--mode", d.mode, "point | nonneg | tte")->capture_default_str();
    cmd->add_option("--mu1", d.mu1, "vaccine-arm risk (aggregate mode)");
    cmd->add_option("--mu0", d.mu0, "control-arm risk (aggregate mode)");
    cmd->add_option("--n1", d.n1, "vaccine-arm size (aggregate mode)");
    cmd->add_option("--n0", d.n0, "control-arm size (aggregate mode)");
  }
}

void write_error(const fs::path& dir, const Json& error) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return;
  try {
    atomic_write(dir / "error.json", dump(error));
  } catch (const std::exception&) {
    // stderr already carries the error
  }
}

Json error_json(std::string_view type, const std::string& rule, const std::string& message,
                const std::string& location, int code) {
  Json detail = {{"type", type}, {"rule", rule}, {"message", message}};
  if (!location.empty()) detail["location"] = location;
  return {{"error", std::move(detail)}, {"exit_code", code}};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exposure-conditional vaccine effect estimation and counterfactual validation", "cece"};
  app.set_version_flag("--version", CECE_VERSION);
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--level", g.level, "confidence level")->capture_default_str();
  app.add_option("--seed", g.seed, "random seed (overrides the config)");
  app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--format", g.format, "json | csv")->capture_default_str();

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "ATE, relative CECE, absolute CECE bounds, excess fraction, CDEs");
  add_data_options(estimate, est.data, true);
  estimate->add_option("--ratio-method", est.ratio_method, "log-delta | fieller")->capture_default_str();
  estimate->add_flag("--continuity-correction", est.continuity_correction, "add 0.5 events when an arm has none");
  estimate->add_flag("--deterministic-exposure", est.deterministic_exposure,
                     "assert P(Y^{a=0,e=1}=1)=1 and report the marginal CDE");

  SensitivityArgs sens;
  auto* sensitivity = app.add_subcommand("sensitivity", "absolute CECE under an assumed exposure or outcome risk");
  add_data_options(sensitivity, sens.data, true);
  sensitivity->add_option("--p-exposure", sens.p_exposure, "assumed P(E=1 | A=0)");
  sensitivity->add_option("--p-outcome", sens.p_outcome, "assumed P(Y=1 | E=1, A=0)");
  sensitivity->add_option("--grid", sens.grid, "sweep size over [mu(0), 1]");
  sensitivity->add_flag("--with-ci", sens.with_ci, "propagate sampling error");

  DataSource surv;
  auto* survival = app.add_subcommand("survival", "discrete-time incidence curves and CECE curves");
  add_data_options(survival, surv, false);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "draw a counterfactual trial and its observed projection");
  simulate->add_option("--config", sim.config, "simulation config (defaults built in)");
  simulate->add_option("--n", sim.n, "cohort size (overrides the config)");
  simulate->add_flag("--survival", sim.survival, "longitudinal trial");

  ValidateArgs val;
  auto* validate = app.add_subcommand("validate", "oracle checks of every identification formula");
  validate->add_option("--config", val.config, "simulation config (defaults built in)");
  validate->add_option("--n", val.n, "cohort size (overrides the config)");
  validate->add_flag("--violation-demo", val.violation_demo, "detected violations do not fail the run");

  for (auto* sub : {estimate, sensitivity, survival, simulate, validate}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << CECE_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << error_json("input", "arguments", e.what(), "", kExitInput).dump() << '\n';
    return kExitInput;
  }

  std::vector<std::string> arguments(argv + 1, argv + argc);
  try {
    Run run(g, std::move(arguments));
    int code = kExitOk;
    if (*estimate) code = cmd_estimate(g, est, run, out);
    else if (*sensitivity) code = cmd_sensitivity(g, sens, run, out);
    else if (*survival) code = cmd_survival(g, surv, run, out, err);
    else if (*simulate) code = cmd_simulate(g, sim, run, out);
    else if (*validate) code = cmd_validate(g, val, run, out, err);
    run.finish();
    return code;
  } catch (const InputError& e) {
    const Json error = error_json("input", e.rule(), e.what(), e.location(), kExitInput);
    err << error.dump() << '\n';
    write_error(g.out_dir, error);
    return kExitInput;
  } catch (const PreconditionError& e) {
    const Json error = error_json("precondition", e.rule(), e.what(), e.location(), kExitPrecondition);
    err << error.dump() << '\n';
    write_error(g.out_dir, error);
    return kExitPrecondition;
  }
}

}  // namespace cece
