// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stratlab/harness/config.hpp"
#include "stratlab/harness/suites.hpp"
#include "stratlab/harness/sweeps.hpp"

using namespace stratlab::harness;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = false;
  std::string measured;
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;
  std::function<Verdict()> run;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Verdict from_suite(const SuiteResult& r) {
  return {r.passed(), to_string(r.outcome) + ", " + r.detail};
}

Verdict from_sweep(const SweepResult& r) {
  Verdict v{r.outcome == Outcome::Pass, to_string(r.outcome) + ", " + r.detail};
  if (r.fit) {
    v.measured += fmt(" (slope %.5f, 95%% CI [%.5f, %.5f]", r.fit->slope, r.fit->lo, r.fit->hi);
    v.measured += fmt(", expected %.2f +- %.2f)", r.expected, r.tolerance);
  }
  return v;
}

const json kKappaSweep = json::parse(R"({
  "schema": "stratlab.config/1",
  "experiment": "sweep-kappa",
  "grid": {"n_x": 256},
  "bilayer": {"rho_s": 0.5, "rho_b": 1.0, "Hbar_s": 0.5, "Hbar_b": 0.5, "Ubar_s": 0.1, "Ubar_b": -0.1},
  "initial": {
    "H_s": {"shape": "sine", "amplitude": 0.05, "wavenumber": 1},
    "H_b": {"shape": "sine", "amplitude": 0.03, "wavenumber": 1, "phase": 0.3},
    "U_s": {"shape": "sine", "amplitude": 0.02, "wavenumber": 1, "phase": 1.0}
  },
  "time": {"T": 0.5, "dt": 0.005, "sigma": 0.1},
  "sweep": {"values": [1e-4, 3e-4, 1e-3, 3e-3, 1e-2], "expected_slope": 1.0, "tolerance": 0.1,
            "amplitude_factors": [2.0]}
})");

const json kEpsilonSweep = json::parse(R"({
  "schema": "stratlab.config/1",
  "experiment": "sweep-epsilon",
  "grid": {"n_x": 128},
  "levels": {"kind": "graded", "n_band": 48, "zone_half_width": 0.3, "growth": 1.15, "n_below": 12, "n_above": 4},
  "bilayer": {"rho_s": 0.5, "rho_b": 1.0, "Hbar_s": 0.4, "Hbar_b": 0.6, "Ubar_s": 0.1, "Ubar_b": -0.1, "kappa": 0.1},
  "initial": {
    "H_s": {"shape": "sine", "amplitude": 0.04, "wavenumber": 1},
    "H_b": {"shape": "sine", "amplitude": 0.03, "wavenumber": 1, "phase": 0.5},
    "U_s": {"shape": "sine", "amplitude": 0.03, "wavenumber": 1, "phase": 1.0},
    "U_b": {"shape": "sine", "amplitude": 0.02, "wavenumber": 1, "phase": 2.0}
  },
  "profile": {"shape": "tanh"},
  "time": {"T": 0.5, "dt": 0.001},
  "sweep": {"values": [0.0005, 0.001, 0.002, 0.005, 0.01, 0.02, 0.05], "expected_slope": 1.0,
            "tolerance": 0.2, "band_factor": 3.0, "band_halfwidth_factor": 6.0, "perturbation": 0.5}
})");

std::vector<Criterion> criteria() {
  return {
      {1, "regime classification vs companion-matrix root count", 10.0,
       [] {
         ClassificationSuite s;
         s.points_per_regime = 1000;
         s.bracket_tolerance = 1e-8;
         return from_suite(classification_suite(s));
       }},
      {2, "atlas intersection counts at H_s:H_b = 1:2", 5.0,
       [] {
         AtlasSuite s;
         s.h_ratio = 0.5;
         s.rho_ratios = {0.1, 0.5, 0.9};
         s.intercepts = {0.5, 1.5, 2.5};
         return from_suite(atlas_suite(s));
       }},
      {3, "symmetrizer certification in p^0.1", 10.0,
       [] {
         SymmetrizerSuite s;
         s.points = 1000;
         s.sigma = 0.1;
         s.symmetry_tolerance = 1e-12;
         s.minor_tolerance = 1e-9;
         return from_suite(symmetrizer_suite(s));
       }},
      {4, "layer mass and velocity-mean conservation", 30.0,
       [] {
         ConservationSuite s;
         s.kappas = {0.0, 0.01, 0.1};
         s.tolerance = 1e-12;
         return from_suite(conservation_suite(s));
       }},
      {5, "total-velocity residual order under dt halving", 60.0,
       [] {
         BdSuite s;
         s.expected_order = 4.0;
         s.order_tolerance = 0.3;
         return from_suite(bd_suite(s));
       }},
      {6, "kappa -> 0 convergence slope", 300.0,
       [] { return from_sweep(sweep_kappa(parse_config(kKappaSweep))); }},
      {7, "bilayer embedding exactness", 120.0,
       [] {
         EmbeddingSuite s;
         s.rhs_tolerance = 1e-12;
         s.trajectory_tolerance = 1e-8;
         s.T = 0.5;
         return from_suite(embedding_suite(s));
       }},
      {8, "Montgomery Lipschitz bound", 10.0,
       [] {
         LipschitzSuite s;
         s.trials = 1000;
         s.tolerance = 1e-9;
         return from_suite(lipschitz_suite(s));
       }},
      {9, "refined approximation consistency", 120.0,
       [] {
         RefinedSuite s;
         s.gap_tolerance = 1e-10;
         s.ratio_tolerance = 1e-9;
         return from_suite(refined_suite(s));
       }},
      {10, "sharp-stratification limit slope in delta_0", 600.0,
       [] { return from_sweep(sweep_epsilon(parse_config(kEpsilonSweep))); }},
  };
}

}  // namespace

int main() {
  int failures = 0;
  for (const Criterion& c : criteria()) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_seconds;
    const bool ok = v.pass && in_time;
    if (!ok) ++failures;
    std::printf("criterion %d: %s  %s | %s | %.1f s (budget %.0f s%s)\n", c.id, ok ? "PASS" : "FAIL",
                c.title.c_str(), v.measured.c_str(), secs, c.budget_seconds, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
