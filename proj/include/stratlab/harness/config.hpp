#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "stratlab/bilayer.hpp"
#include "stratlab/hyperbolicity.hpp"
#include "stratlab/stratified.hpp"

namespace stratlab::harness {

inline constexpr const char* kConfigSchema = "stratlab.config/1";

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"atlas",          "classify",     "simulate-bilayer",
                                            "simulate-stratified", "refine", "sweep-kappa",
                                            "sweep-epsilon",  "check-all"};
  return ids;
}

struct GridConfig {
  double length = 2.0 * std::numbers::pi;
  std::size_t n_x = 256;
};

/// kind: "interface" (uniform on each side of r = -Hbar_s), "uniform",
/// "clustered", "graded" or "edges".
struct LevelConfig {
  std::string kind = "interface";
  std::size_t n_r = 64;
  double half_width = 0.1;
  std::size_t n_band = 32;
  double zone_half_width = 0.3;
  double growth = 1.15;
  std::size_t n_below = 12;
  std::size_t n_above = 4;
  std::vector<double> edges;
};

struct InitialConfig {
  /// "closed-form" or "csv"
  std::string source = "closed-form";
  std::string path;
  std::array<LayerData, 4> layers{};
};

struct ProfileConfig {
  /// "bilayer-embed", "smooth-pycnocline" or "csv"
  std::string source = "bilayer-embed";
  double epsilon = 0.01;
  PycnoclineShape shape = PycnoclineShape::Tanh;
  std::string path;
  /// refine: peak of the in-band bump added to the embedded h.
  double perturbation = 0.3;
};

struct TimeConfig {
  double T = 0.5;
  IntegrateOptions options;
};

struct SweepConfig {
  std::vector<double> values;
  double expected_slope = 1.0;
  double tolerance = 0.1;
  /// sweep-kappa: extra amplitude multipliers for the intercept comparison.
  std::vector<double> amplitude_factors;
  /// sweep-epsilon: levels with |r + Hbar_s| > band_factor * eps count as outside.
  double band_factor = 3.0;
  /// sweep-epsilon: peak of the in-band bump added to the embedded h.
  double perturbation = 0.5;
  /// sweep-epsilon level grid: the fine band spans +-band_halfwidth_factor * eps.
  double band_halfwidth_factor = 6.0;
};

struct AtlasConfig {
  double h_ratio = 0.5;
  std::vector<double> rho_ratios{0.1, 0.5, 0.9};
  std::vector<double> intercepts{0.5, 1.5, 2.5};
  std::size_t samples = 4000;
  double window = 50.0;
};

struct CheckConfig {
  std::size_t random_points = 1000;
  /// Suite names to run; empty runs all.
  std::vector<std::string> suites;
  /// Flip the Montgomery sign inside the embedding suite (mutation fixture).
  bool fault_montgomery_sign = false;
  /// Diffusivity of the total-velocity suite; 0 skips it.
  double bd_kappa = 0.05;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  std::string output = "out";
  std::size_t threads = 1;
  bool plots = false;
  GridConfig grid;
  LevelConfig levels;
  BilayerParams bilayer;
  InitialConfig initial;
  ProfileConfig profile;
  TimeConfig time;
  SweepConfig sweep;
  AtlasConfig atlas;
  StatePoint point;
  CheckConfig check;
};

/// Throws ConfigError on unknown keys, wrong types, a missing or unknown
/// schema, or values violating the documented invariants.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

SpatialGrid make_grid(const ExperimentConfig& c);
/// Builds the configured level grid for a given interface position.
LevelGrid make_levels(const LevelConfig& c, double interface);
BilayerState make_initial_bilayer(const ExperimentConfig& c, const SpatialGrid& grid);

}  // namespace stratlab::harness
