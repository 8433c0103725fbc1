#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "stratlab/core/error.hpp"
#include "stratlab/harness/config.hpp"
#include "stratlab/harness/experiments.hpp"
#include "stratlab/harness/fit.hpp"
#include "stratlab/harness/suites.hpp"
#include "stratlab/harness/sweeps.hpp"

using namespace stratlab;
using namespace stratlab::harness;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("stratlab_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("slope fits") {
  const std::vector<double> x{1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> y = x;
  SlopeFit f = fit_slope(x, y);
  CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.points == 4);
  CHECK(f.within(1.0, 1e-6));

  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3.0 * x[i] * x[i];
  f = fit_slope(x, y);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-10));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  std::vector<double> xs, ys;
  for (int k = 0; k < 12; ++k) {
    xs.push_back(std::pow(10.0, -3.0 + 0.25 * k));
    ys.push_back(xs.back() * (1.0 + noise(rng)));
  }
  f = fit_slope(xs, ys);
  CHECK(f.slope > 0.9);
  CHECK(f.slope < 1.1);
  CHECK(f.lo <= f.slope);
  CHECK(f.hi >= f.slope);

  CHECK_THROWS_AS(fit_slope(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), DomainError);
  CHECK_THROWS_AS(fit_slope(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 0, 3, 4}), DomainError);
}

TEST_CASE("observed orders") {
  const std::vector<double> e{1.0, 1.0 / 16.0, 1.0 / 256.0};
  for (double o : observed_orders(e)) CHECK(o == doctest::Approx(4.0));
}

TEST_CASE("config parsing") {
  json j{{"schema", kConfigSchema}, {"experiment", "classify"}, {"point", {{"rho_s", 0.5}}}};
  CHECK_NOTHROW(parse_config(j));
  json bad = j;
  bad["colour"] = "red";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["schema"] = "stratlab.config/0";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad.erase("schema");
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["experiment"] = "dance";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["grid"] = {{"n_x", "many"}};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["bilayer"] = {{"rho_s", -0.5}};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("shipped configs parse") {
  for (const auto& entry : std::filesystem::directory_iterator(STRATLAB_CONFIGS)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path().string()));
  }
}

TEST_CASE("check-all detects a corrupted pressure operator") {
  CheckAllOptions o;
  o.only = {"embedding"};
  const auto good = run_suites(o);
  REQUIRE(good.size() == 1);
  CHECK(good[0].outcome == Outcome::Pass);
  o.fault_montgomery_sign = true;
  const auto bad = run_suites(o);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].outcome == Outcome::Fail);
  o.only = {"nonsense"};
  CHECK_THROWS_AS(run_suites(o), ConfigError);
}

TEST_CASE("total-velocity suite is skipped without diffusion") {
  BdSuite s;
  s.kappa = 0.0;
  CHECK(bd_suite(s).outcome == Outcome::Skipped);
}

TEST_CASE("zero data give an exact kappa sweep") {
  ExperimentConfig c;
  c.experiment = "sweep-kappa";
  c.grid.n_x = 16;
  c.bilayer = default_params(0.0);
  c.time.T = 0.1;
  c.time.options.dt = 0.01;
  c.sweep.values = {1e-4, 1e-3, 1e-2, 1e-1};
  const SweepResult r = sweep_kappa(c);
  CHECK(r.outcome == Outcome::Pass);
  for (double e : r.errors) CHECK(e == 0.0);
}

TEST_CASE("sweeps need enough span") {
  ExperimentConfig c;
  c.experiment = "sweep-kappa";
  c.grid.n_x = 16;
  c.bilayer = default_params(0.0);
  c.sweep.values = {1e-3, 2e-3, 3e-3, 4e-3};
  CHECK_THROWS_AS(sweep_kappa(c), ConfigError);
}

TEST_CASE("experiment outputs are deterministic") {
  ExperimentConfig c;
  c.experiment = "simulate-bilayer";
  c.grid.n_x = 32;
  c.bilayer = default_params(0.02);
  c.initial.layers = default_layers();
  c.time.T = 0.1;
  c.time.options.samples = 2;
  const auto a = scratch("det_a"), b = scratch("det_b");
  c.output = a.string();
  const ExperimentResult ra = run_experiment(c);
  c.output = b.string();
  const ExperimentResult rb = run_experiment(c);
  CHECK(ra.exit_code() == 0);
  REQUIRE(std::filesystem::exists(a / "trajectory.csv"));
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "diagnostics.csv") == slurp(b / "diagnostics.csv"));
  CHECK(ra.files.back().ends_with("summary.json"));
  const json summary = json::parse(slurp(a / "summary.json"));
  CHECK(summary["id"] == "simulate-bilayer");
  CHECK(summary["pass"] == true);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("classify experiment") {
  ExperimentConfig c;
  c.experiment = "classify";
  c.point = StatePoint{0.5, 1.0, 0.5, 1.0, 0.0, 0.2};
  const auto dir = scratch("classify");
  c.output = dir.string();
  const ExperimentResult r = run_experiment(c);
  CHECK(r.exit_code() == 0);
  const json j = json::parse(slurp(dir / "classify.json"));
  CHECK(j["regime"] == "Hyperbolic");
  CHECK(j["real_roots"] == 4);
  std::filesystem::remove_all(dir);
}
