#pragma once

#include <span>
#include <string>
#include <vector>

#include "stratlab/stratified.hpp"

namespace stratlab {

/// Dense snapshots of a reference stratified solution.
struct ReferenceRun {
  StratifiedProfile profile;
  double kappa = 0.0;
  std::vector<StratifiedState> snapshots;

  /// Snapshot times must increase strictly and share one shape.
  void validate() const;
  double horizon() const;
};

/// Runs the stratified solver and keeps every step.
ReferenceRun run_reference(const SpatialGrid& grid, const StratifiedState& initial,
                           const StratifiedProfile& profile, double kappa, double T,
                           const IntegrateOptions& options = {});

/// F(t) = -(1/rho) M[rho] d_x h_ref(t) on the target profile, tabulated at the
/// reference snapshot times and interpolated by four-point Lagrange cubics.
class ForcingSeries {
 public:
  ForcingSeries(const SpatialGrid& grid, const ReferenceRun& ref, const StratifiedProfile& target);

  double start() const noexcept { return times_.front(); }
  double horizon() const noexcept { return times_.back(); }
  std::size_t levels() const noexcept { return n_r_; }
  std::size_t points() const noexcept { return n_x_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& at_snapshot(std::size_t k) const { return values_[k]; }

  /// Throws DomainError outside [start, horizon] (beyond 1e-12 relative slack).
  void evaluate(double t, std::span<double> out) const;
  /// Zeroes the forcing on one level at every time.
  void zero_level(std::size_t level);

 private:
  std::size_t n_r_ = 0;
  std::size_t n_x_ = 0;
  std::vector<double> times_;
  std::vector<std::vector<double>> values_;
};

ForcingSeries build_forcing(const SpatialGrid& grid, const ReferenceRun& ref,
                            const StratifiedProfile& target);

struct RefinedRun {
  StratifiedProfile profile;
  double kappa = 0.0;
  std::vector<StratifiedState> trajectory;
  RunStatus status = RunStatus::Completed;
  double halt_time = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
};

/// Integrates the forced, level-decoupled system from `initial` on [t0, t0 + T]
/// where t0 = initial.t. The forcing must cover the interval.
RefinedRun solve_refined(const SpatialGrid& grid, const StratifiedState& initial,
                         const StratifiedProfile& profile, const ForcingSeries& forcing, double kappa,
                         double T, const IntegrateOptions& options = {});

struct ResidualSample {
  double t = 0.0;
  /// ||r_rem(., r_i)||_{H^s} from the closed form (1/rho) M[rho] d_x (h_app - h_ref).
  std::vector<double> residual_hs;
  /// Same from substitution: refined rates minus the true system's rates.
  std::vector<double> substituted_hs;
  /// ||rho||_inf ||1/rho||_inf ||(h_ref - h_app)(t)||_{L^1_r H^{s+1}}
  double bound = 0.0;
  double max_ratio = 0.0;
  /// max |substituted - closed| / max |closed| over the grid.
  double relative_gap = 0.0;
};

struct ConsistencyReport {
  std::vector<ResidualSample> samples;
  double max_ratio = 0.0;
  double max_relative_gap = 0.0;
};

/// Requires the refined trajectory times to coincide with reference snapshot
/// times (to 1e-12).
ConsistencyReport consistency_residual(const SpatialGrid& grid, const RefinedRun& run,
                                       const ReferenceRun& ref, const ForcingSeries& forcing,
                                       double s = 2.0);

/// CSV columns t, r, residual_hs, bound, ratio.
void write_residual_csv(const std::string& path, const LevelGrid& levels,
                        const ConsistencyReport& report);

}  // namespace stratlab
