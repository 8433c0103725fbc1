#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>
#include <sys/wait.h>

namespace {

int run(const std::string& args, const std::string& capture = {}) {
  std::string cmd = std::string(STRATLAB_CLI) + " " + args;
  cmd += capture.empty() ? " > /dev/null 2>&1" : " > " + capture + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const std::string& name) { return std::string(STRATLAB_CONFIGS) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p.string();
}

}  // namespace

TEST_CASE("help and parse errors") {
  CHECK(run("--help") == 0);
  CHECK(run("") == 2);
  CHECK(run("dance") == 2);
  CHECK(run("classify --config /does/not/exist.json") == 2);
}

TEST_CASE("classify prints its report") {
  const std::string cfg = write_temp(
      "stratlab_cli_classify.json",
      R"({"schema": "stratlab.config/1", "experiment": "classify",
          "point": {"rho_s": 0.5, "rho_b": 1.0, "H_s": 0.5, "H_b": 1.0, "U_s": 0.0, "U_b": 1.5}})");
  const std::string out = (std::filesystem::temp_directory_path() / "stratlab_cli_classify.out").string();
  CHECK(run("classify --config " + cfg + " --out cli_classify", out) == 0);
  std::ifstream in(out);
  const nlohmann::json j = nlohmann::json::parse(in);
  CHECK(j["regime"] == "Elliptic");
  CHECK(j["real_roots"] == 2);
  CHECK(std::filesystem::exists("cli_classify/summary.json"));
}

TEST_CASE("configuration errors exit with 2") {
  const std::string unknown = write_temp("stratlab_cli_unknown.json",
                                         R"({"schema": "stratlab.config/1", "experiment": "classify", "extra": 1})");
  CHECK(run("classify --config " + unknown) == 2);
  const std::string schema = write_temp("stratlab_cli_schema.json", R"({"experiment": "classify"})");
  CHECK(run("classify --config " + schema) == 2);
  const std::string mismatch = write_temp("stratlab_cli_mismatch.json",
                                          R"({"schema": "stratlab.config/1", "experiment": "atlas"})");
  CHECK(run("classify --config " + mismatch) == 2);
}

TEST_CASE("a failing suite exits with 1") {
  CHECK(run("check-all --config " + config("check_all_fault.json") + " --out cli_fault") == 1);
  std::ifstream in("cli_fault/check.json");
  const nlohmann::json j = nlohmann::json::parse(in);
  REQUIRE(j["suites"].size() == 1);
  CHECK(j["suites"][0]["outcome"] == "fail");
}

TEST_CASE("a passing run exits with 0") {
  const std::string cfg = write_temp(
      "stratlab_cli_sim.json",
      R"({"schema": "stratlab.config/1", "experiment": "simulate-bilayer", "grid": {"n_x": 32},
          "bilayer": {"Ubar_s": 0.1, "Ubar_b": -0.1, "kappa": 0.01},
          "initial": {"H_s": {"shape": "sine", "amplitude": 0.05, "wavenumber": 1}},
          "time": {"T": 0.1}})");
  CHECK(run("simulate-bilayer --config " + cfg + " --out cli_sim --plots") == 0);
  CHECK(std::filesystem::exists("cli_sim/trajectory.csv"));
  CHECK(std::filesystem::exists("cli_sim/summary.json"));
}
