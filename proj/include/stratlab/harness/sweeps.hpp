#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stratlab/harness/config.hpp"
#include "stratlab/harness/fit.hpp"
#include "stratlab/harness/suites.hpp"

namespace stratlab::harness {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct SweepResult {
  std::string name;
  std::vector<double> abscissae;
  /// Headline error per abscissa.
  std::vector<double> errors;
  /// Raw per-point table, enough to recompute every fit.
  Table points;
  /// sweep-epsilon: per-level terminal distances.
  Table levels;
  /// Fit of errors against abscissae; empty when every error is zero.
  std::optional<SlopeFit> fit;
  double expected = 1.0;
  double tolerance = 0.0;
  Outcome outcome = Outcome::Pass;
  std::string detail;
  nlohmann::json data = nlohmann::json::object();
};

/// Terminal H^s distance of kappa runs from the kappa = 0 run, fitted in kappa.
/// Extra amplitude factors f rerun every point with the data scaled by f; the
/// error ratio divided by f must lie in [0.75, 1.5].
SweepResult sweep_kappa(const ExperimentConfig& c);

/// Terminal per-level H^s distance between the stratified run on a smoothed
/// pycnocline (from embedded data plus an in-band bump) and the embedded
/// bilayer run, fitted in delta_0 = ||rho_eps - rho_bl||_{L^1_r}. The pass
/// criterion is a fit per level, over the levels that are shared by every
/// grid of the sweep and lie outside band_factor * eps for every eps.
SweepResult sweep_epsilon(const ExperimentConfig& c);

}  // namespace stratlab::harness
