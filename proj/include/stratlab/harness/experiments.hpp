#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stratlab/harness/config.hpp"
#include "stratlab/harness/fit.hpp"
#include "stratlab/harness/suites.hpp"

namespace stratlab::harness {

struct ExperimentResult {
  std::string id;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Pass;
  std::optional<SlopeFit> fit;
  /// Paths of every file written, summary.json last.
  std::vector<std::string> files;
  std::string detail;
  nlohmann::json details = nlohmann::json::object();

  /// 0 pass or skipped, 1 failure, 3 inconclusive.
  int exit_code() const noexcept;
  /// {id, seed, pass, outcome, slope, interval, files, detail, details}
  nlohmann::json summary() const;
};

/// Runs c.experiment, writes its CSV tables (and SVG plots if c.plots) into
/// c.output and finishes with summary.json. Throws ConfigError for bad input.
ExperimentResult run_experiment(const ExperimentConfig& c);

}  // namespace stratlab::harness
