#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "stratlab/bilayer.hpp"
#include "stratlab/refined.hpp"
#include "stratlab/stratified.hpp"

namespace stratlab::harness {

enum class Outcome { Pass, Fail, Skipped, Inconclusive };
std::string to_string(Outcome o);

struct SuiteResult {
  std::string name;
  Outcome outcome = Outcome::Pass;
  /// Headline measurement and the threshold it is judged against.
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
  nlohmann::json data = nlohmann::json::object();
  double seconds = 0.0;

  bool passed() const noexcept { return outcome == Outcome::Pass; }
};

nlohmann::json to_json(const SuiteResult& r);

// ---------------------------------------------------------------------------

struct ClassificationSuite {
  std::uint64_t seed = 1;
  std::size_t points_per_regime = 1000;
  /// Keeps sampled shears at least this relative distance from Fr_-+.
  double threshold_gap = 1e-3;
  /// Number of sampled (h, rho) pairs whose Fr_-+ are recomputed on refined
  /// bisection brackets.
  std::size_t bracket_checks = 50;
  double bracket_tolerance = 1e-8;
};
/// classify vs eigenvalues of A(U) and vs the regime fixed by construction;
/// Fr_-+ stability under bracket refinement.
SuiteResult classification_suite(const ClassificationSuite& s);

struct AtlasSuite {
  double h_ratio = 0.5;
  std::vector<double> rho_ratios{0.1, 0.5, 0.9};
  std::vector<double> intercepts{0.5, 1.5, 2.5};
  std::size_t samples = 4000;
  double window = 50.0;
};
/// Line/curve intersection counts against the classifier's real-root counts.
SuiteResult atlas_suite(const AtlasSuite& s);

struct SymmetrizerSuite {
  std::uint64_t seed = 2;
  std::size_t points = 1000;
  double sigma = 0.1;
  double symmetry_tolerance = 1e-12;
  double minor_tolerance = 1e-9;
};
SuiteResult symmetrizer_suite(const SymmetrizerSuite& s);

/// Default smooth initial data in p^sigma used by the bilayer suites.
std::array<LayerData, 4> default_layers(double amplitude = 1.0);
BilayerParams default_params(double kappa);

/// Adds amplitude * max(0, 1 - |r - interface| / eps) * sin(2 pi x / L) to h
/// on the levels whose midpoints lie within eps of the interface.
void perturb_pycnocline(StratifiedState& s, const SpatialGrid& grid, const LevelGrid& levels,
                        double interface, double eps, double amplitude);

/// Reference: the embedded two-layer solution on the bilayer profile.
/// Target: the smoothed pycnocline. Refined data: the embedded data with an
/// in-band bump, so that h_app - h_ref is nonzero from t = 0.
struct RefinedSetup {
  BilayerParams params;
  std::array<LayerData, 4> layers;
  double length = 2.0 * std::numbers::pi;
  std::size_t n_x = 64;
  LevelGrid levels = LevelGrid::uniform(1);
  double epsilon = 0.02;
  PycnoclineShape shape = PycnoclineShape::Tanh;
  double perturbation = 0.3;
  double T = 0.25;
  /// 0: the smaller stable step of the two runs.
  double dt = 0.0;
  double cfl = 0.4;
  double sobolev_s = 2.0;
};

struct RefinedOutcome {
  SpatialGrid grid;
  StratifiedProfile target;
  ReferenceRun reference;
  ForcingSeries forcing;
  RefinedRun run;
  ConsistencyReport report;
};

RefinedOutcome run_refined_case(const RefinedSetup& s);

struct ConservationSuite {
  std::vector<double> kappas{0.0, 0.01, 0.1};
  std::size_t n_x = 128;
  double T = 1.0;
  double tolerance = 1e-12;
};
/// Drift of the layer means per unit time; velocity means only for kappa = 0.
SuiteResult conservation_suite(const ConservationSuite& s);

struct BdSuite {
  double kappa = 0.05;
  std::size_t n_x = 64;
  std::vector<double> dts{0.02, 0.01, 0.005};
  double T = 1.0;
  double expected_order = 4.0;
  double order_tolerance = 0.3;
  /// Absolute bound on the finest residual.
  double residual_bound = 1e-6;
};
/// Substitutes (H, V) into the total-velocity system; skipped when kappa = 0.
SuiteResult bd_suite(const BdSuite& s);

struct RichardsonSuite {
  double kappa = 0.01;
  std::size_t n_x = 64;
  double dt = 0.02;
  double T = 1.0;
};
/// Self-convergence ratio of RK4 under dt halving, expected 16 within a factor 2.
SuiteResult richardson_suite(const RichardsonSuite& s);

struct EmbeddingSuite {
  std::size_t n_x = 64;
  std::size_t n_lower = 10;
  std::size_t n_upper = 6;
  double kappa = 0.05;
  double T = 0.5;
  double dt = 0.01;
  double rhs_tolerance = 1e-12;
  double trajectory_tolerance = 1e-8;
  bool fault_montgomery_sign = false;
};
SuiteResult embedding_suite(const EmbeddingSuite& s);

struct LipschitzSuite {
  std::uint64_t seed = 3;
  std::size_t trials = 1000;
  double tolerance = 1e-9;
};
SuiteResult lipschitz_suite(const LipschitzSuite& s);

struct RefinedSuite {
  std::uint64_t seed = 4;
  /// Randomised small runs in addition to the fixed one.
  std::size_t random_runs = 3;
  std::size_t n_x = 64;
  double kappa = 0.1;
  double T = 0.25;
  double gap_tolerance = 1e-10;
  double ratio_tolerance = 1e-9;
};
/// Substitution vs closed-form remainder and the consistency bound.
SuiteResult refined_suite(const RefinedSuite& s);

struct SelfConsistencySuite {
  std::size_t n_x = 64;
  double kappa = 0.05;
  double T = 0.25;
};
/// Refined run with reference data reproduces the reference run; zeroing the
/// forcing on one level leaves the other levels bitwise unchanged.
SuiteResult refined_self_consistency_suite(const SelfConsistencySuite& s);

/// Names accepted by run_suites, in execution order.
const std::vector<std::string>& suite_names();

struct CheckAllOptions {
  std::uint64_t seed = 1;
  std::size_t random_points = 1000;
  /// Diffusivity for the total-velocity suite; 0 skips it.
  double bd_kappa = 0.05;
  bool fault_montgomery_sign = false;
  /// Empty runs every suite.
  std::vector<std::string> only;
  std::size_t threads = 1;
};
std::vector<SuiteResult> run_suites(const CheckAllOptions& o);

}  // namespace stratlab::harness
