#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cece/cli.hpp"
#include "cece/estimators.hpp"
#include "cece/report.hpp"
#include "cece/simulator.hpp"
#include "cece/survival.hpp"

using namespace cece;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
  Json json() const { return Json::parse(out); }
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cece");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  static const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  const fs::path dir = fs::temp_directory_path() / ("cece_cli_" + std::to_string(stamp)) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

double rounded(double v) { return round_significant(v); }

}  // namespace

TEST_CASE("estimate from arm aggregates") {
  const auto dir = scratch("aggregate");
  const auto r = cli({"--out-dir", dir.string(), "estimate", "--mu1", "0.009", "--mu0", "0.031", "--n1", "5807", "--n0",
                      "5829"});
  REQUIRE(r.code == kExitOk);
  const auto j = r.json();
  CHECK(j["estimates"]["rcece"]["point"].get<double>() == doctest::Approx(0.2903).epsilon(0.002));
  CHECK(j["estimates"]["acece_bounds"]["lower"]["point"].get<double>() == doctest::Approx(0.022));
  CHECK(j["estimates"]["acece_bounds"]["upper"]["point"].get<double>() == doctest::Approx(0.7097).epsilon(0.001));
  CHECK(j["estimates"]["ate"]["point"].get<double>() == doctest::Approx(-0.022));
  CHECK(j["run_id"].get<std::string>().size() == 16);
  REQUIRE(fs::exists(dir / "estimate.json"));
  REQUIRE(fs::exists(dir / "manifest.json"));
  const auto manifest = read_json(dir / "manifest.json");
  CHECK(manifest["run_id"] == j["run_id"]);
  CHECK(slurp(dir / "estimate.json") == r.out);

  const auto csv = cli({"--out-dir", dir.string(), "--format", "csv", "estimate", "--mu1", "0.009", "--mu0", "0.031",
                        "--n1", "5807", "--n0", "5829"});
  REQUIRE(csv.code == kExitOk);
  CHECK(csv.out.rfind("# run_id=", 0) == 0);
  CHECK(csv.out.find("\nrcece,0.290322580645,") != std::string::npos);
}

TEST_CASE("input errors exit 2 with a structured message and error.json") {
  const auto dir = scratch("errors");
  const auto empty = dir / "empty.csv";
  std::ofstream(empty).close();
  const auto r = cli({"--out-dir", dir.string(), "estimate", "--input", empty.string()});
  CHECK(r.code == kExitInput);
  const auto e = Json::parse(r.err);
  CHECK(e["exit_code"] == 2);
  CHECK(e["error"]["message"].get<std::string>().find("empty input") != std::string::npos);
  CHECK(fs::exists(dir / "error.json"));
  CHECK_FALSE(fs::exists(dir / "manifest.json"));

  CHECK(cli({"estimate", "--bogus"}).code == kExitInput);
  CHECK(cli({"--out-dir", dir.string(), "estimate", "--mu1", "0.1"}).code == kExitInput);
  CHECK(cli({"--out-dir", dir.string(), "--level", "1.5", "estimate", "--mu1", "0.1", "--mu0", "0.2", "--n1", "10",
             "--n0", "10"})
            .code == kExitInput);
}

TEST_CASE("precondition errors exit 3") {
  const auto dir = scratch("precondition");
  const auto r = cli({"--out-dir", dir.string(), "estimate", "--mu1", "0.1", "--mu0", "0", "--n1", "100", "--n0", "100"});
  CHECK(r.code == kExitPrecondition);
  CHECK(Json::parse(r.err)["error"]["type"] == "precondition");
  const auto s = cli({"--out-dir", dir.string(), "sensitivity", "--mu1", "0.009", "--mu0", "0.031", "--n1", "5807",
                      "--n0", "5829", "--p-exposure", "0.01"});
  CHECK(s.code == kExitPrecondition);
  CHECK(Json::parse(s.err)["error"]["rule"] == "infeasible-parameter");
}

TEST_CASE("sensitivity subcommand") {
  const auto dir = scratch("sensitivity");
  const std::vector<std::string> base{"--out-dir", dir.string(), "sensitivity", "--mu1", "0.009", "--mu0", "0.031",
                                      "--n1",      "5807",       "--n0",        "5829"};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  };
  const auto e6 = with({"--p-exposure", "0.6"});
  REQUIRE(e6.code == kExitOk);
  CHECK(e6.json()["points"][0]["acece"].get<double>() == doctest::Approx(0.022 / 0.6));

  const auto grid = with({"--grid", "2"});
  REQUIRE(grid.code == kExitOk);
  const auto points = grid.json()["points"];
  CHECK(points[0]["acece"].get<double>() == doctest::Approx(1 - 9.0 / 31.0));
  CHECK(points[1]["acece"].get<double>() == doctest::Approx(0.022));

  const auto y = with({"--p-outcome", "0.85"});
  REQUIRE(y.code == kExitOk);
  CHECK(y.json()["points"][0]["acece"].get<double>() == doctest::Approx(0.85 * 22.0 / 31.0));

  CHECK(with({"--grid", "3", "--p-outcome", "0.5"}).code == kExitInput);
  CHECK(with({}).code == kExitInput);
}

TEST_CASE("simulate then analyse matches the library on the same draw") {
  const auto dir = scratch("two_path");
  const auto sim = cli({"--out-dir", dir.string(), "--seed", "99", "simulate", "--n", "20000"});
  REQUIRE(sim.code == kExitOk);
  CHECK(slurp(dir / "observed.csv").rfind("# run_id=", 0) == 0);
  const auto est = cli({"--out-dir", (dir / "est").string(), "estimate", "--input", (dir / "observed.csv").string()});
  REQUIRE(est.code == kExitOk);

  auto config = default_simulation_config();
  config.n = 20000;
  config.seed = 99;
  const auto summary = summarize_arms(simulate_point_trial(config).observed);
  const auto j = est.json()["estimates"];
  CHECK(j["rcece"]["point"].get<double>() == rounded(estimate_relative_cece(summary).point));
  CHECK(j["rcece"]["ci"][0].get<double>() == rounded(estimate_relative_cece(summary).ci_lower));
  CHECK(j["ate"]["point"].get<double>() == rounded(estimate_ate(summary).point));
  const auto bounds = bound_absolute_cece(summary);
  CHECK(j["acece_bounds"]["lower"]["point"].get<double>() == rounded(bounds.lower.point));
  CHECK(j["acece_bounds"]["upper"]["point"].get<double>() == rounded(bounds.upper.point));
  CHECK(j["conditional_cde"].size() == 2);
  CHECK(read_json(dir / "est" / "manifest.json")["inputs"][0]["sha256"].get<std::string>().size() == 64);

  // The same subcommand refuses time-to-event input.
  const auto surv_sim = cli({"--out-dir", (dir / "surv").string(), "--seed", "99", "simulate", "--n", "20000",
                             "--survival"});
  REQUIRE(surv_sim.code == kExitOk);
  const auto observed = (dir / "surv" / "observed.csv").string();
  CHECK(cli({"--out-dir", (dir / "x").string(), "estimate", "--input", observed, "--mode", "tte"}).code == kExitInput);

  const auto surv = cli({"--out-dir", (dir / "surv_out").string(), "survival", "--input", observed, "--intervals", "10"});
  REQUIRE(surv.code == kExitOk);
  CHECK(fs::exists(dir / "surv_out" / "survival_incidence.csv"));
  CHECK(fs::exists(dir / "surv_out" / "survival_curve.csv"));
  const auto trial = simulate_survival_trial(config);
  const auto mu = cumulative_incidence(discrete_hazards(build_event_table(trial.observed)));
  const auto ratio = relative_cece_curve(mu, 0.95);
  const auto curve = surv.json()["curve"];
  REQUIRE(curve.size() == ratio.size());
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    const int k = ratio[i].k;
    CHECK(curve[i]["mu"][0].get<double>() == rounded(mu.at(Arm::control, k)));
    CHECK(curve[i]["mu"][1].get<double>() == rounded(mu.at(Arm::vaccine, k)));
    CHECK(curve[i]["rcece"]["point"].get<double>() == rounded(ratio[i].estimate->point));
  }
}

TEST_CASE("validate exit codes and reproducible output") {
  const auto dir = scratch("validate");
  const auto ok = cli({"--out-dir", (dir / "a").string(), "validate", "--n", "20000"});
  CHECK(ok.code == kExitOk);
  CHECK(ok.json()["status"] == "pass");
  const auto again = cli({"--out-dir", (dir / "b").string(), "validate", "--n", "20000"});
  CHECK(slurp(dir / "a" / "validation.json") == slurp(dir / "b" / "validation.json"));
  CHECK(ok.out == again.out);

  const auto config = dir / "violating.txt";
  std::ofstream(config) << "n = 50000\nseed = 5\ncovariate_dist = 0.5, 0.5\n"
                           "exposure_prob.arm0 = 0.5, 0.7\nexposure_prob.arm1 = 0.2, 0.3\n"
                           "outcome_prob.arm0 = 0.05, 0.08\noutcome_prob.arm1 = 0.015, 0.024\n";
  const auto strict = cli({"--out-dir", (dir / "c").string(), "validate", "--config", config.string()});
  CHECK(strict.code == kExitValidation);
  CHECK(Json::parse(strict.err)["exit_code"] == 4);
  const auto demo = cli({"--out-dir", (dir / "d").string(), "validate", "--config", config.string(), "--violation-demo"});
  CHECK(demo.code == kExitOk);
}
