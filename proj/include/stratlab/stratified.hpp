#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stratlab/bilayer.hpp"
#include "stratlab/core/grid.hpp"
#include "stratlab/core/spectral.hpp"

namespace stratlab {

/// Reference density and velocity sampled at the level midpoints.
struct StratifiedProfile {
  LevelGrid levels = LevelGrid::uniform(1);
  std::vector<double> rho;
  std::vector<double> ubar;

  std::size_t size() const noexcept { return levels.size(); }
  /// Sizes match, densities positive and finite, velocities finite.
  void validate() const;
  /// max(||rho||_inf, ||1/rho||_inf)
  double bound() const;
};

struct StratifiedState {
  double t = 0.0;
  Field2D h;
  Field2D u;

  static StratifiedState zero(std::size_t n_r, std::size_t n_x);
};

/// Midpoint-rule Montgomery potential with half-cell self weight:
/// Psi_i = rho_i (sum_{j<i} w_j h_j + w_i h_i / 2) + sum_{j>i} w_j rho_j h_j + w_i rho_i h_i / 2.
Field2D montgomery(const StratifiedProfile& profile, const Field2D& h);

/// Pseudo-spectral solver for the continuously stratified system. Level
/// coupling enters only through (1/rho) M[rho] applied to d_x h, evaluated
/// mode by mode on the Fourier coefficients.
class StratifiedSolver {
 public:
  StratifiedSolver(const SpatialGrid& grid, const StratifiedProfile& profile, double kappa);
  ~StratifiedSolver();
  StratifiedSolver(StratifiedSolver&&) noexcept;
  StratifiedSolver& operator=(StratifiedSolver&&) noexcept;

  const SpatialGrid& grid() const noexcept { return grid_; }
  const StratifiedProfile& profile() const noexcept { return profile_; }
  double kappa() const noexcept { return kappa_; }

  /// Flat layout [h level 0 .. level n_r-1 | u level 0 .. n_r-1].
  void rhs(std::span<const double> y, std::span<double> dydt);
  StratifiedState rhs(const StratifiedState& s);
  /// Rates with the pressure coupling replaced by a prescribed forcing
  /// (flat, level-major); the levels then evolve independently.
  void rhs_forced(std::span<const double> y, std::span<const double> forcing, std::span<double> dydt);

  /// Pressure term (1/rho) M[rho] d_x h for the h-part of a flat state.
  void pressure(std::span<const double> h, std::span<double> out);

  void step(std::span<double> y, double dt);

  /// Fastest gravity-wave speed plus advection and bolus speeds.
  double max_speed(std::span<const double> y);
  double stable_dt(std::span<const double> y, double cfl);

  /// Flips the sign of the Montgomery term. Exists only so that test suites
  /// can demonstrate that they detect a corrupted pressure operator.
  void inject_pressure_sign_fault(bool on) noexcept { fault_ = on; }

  SpectralOps& spectral() noexcept { return ops_; }

 private:
  void evaluate(std::span<const double> y, std::span<const double> forcing, std::span<double> dydt);

  SpatialGrid grid_;
  StratifiedProfile profile_;
  double kappa_;
  SpectralOps ops_;
  bool fault_ = false;
  struct Work;
  std::unique_ptr<Work> work_;
};

std::vector<double> flatten(const StratifiedState& s);
StratifiedState unflatten_stratified(std::span<const double> y, std::size_t n_r, std::size_t n_x,
                                     double t);

StratifiedState stratified_rhs(const SpatialGrid& grid, const StratifiedState& s,
                               const StratifiedProfile& profile, double kappa);

struct StratifiedDiagnostic {
  double t = 0.0;
  /// min over grid and levels of 1 + h
  double min_depth = 0.0;
  /// sqrt(sum_i w_i (||h_i||_{H^s}^2 + ||u_i||_{H^s}^2))
  double hs_norm = 0.0;
  std::vector<double> mass;
};

struct StratifiedRun {
  std::vector<StratifiedState> trajectory;
  std::vector<StratifiedDiagnostic> diagnostics;
  StratifiedState final_state;
  RunStatus status = RunStatus::Completed;
  double halt_time = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
};

/// Same stepping, sampling and halting rules as the bilayer integrator;
/// options.sigma is ignored, positivity is judged against options.depth_floor.
StratifiedRun integrate(const SpatialGrid& grid, const StratifiedState& initial,
                        const StratifiedProfile& profile, double kappa, double T,
                        const IntegrateOptions& options = {});

/// Per-level piecewise-constant embedding of a two-layer state.
/// Requires an edge of `levels` at r = -Hbar_s.
std::pair<StratifiedProfile, StratifiedState> embed_bilayer(const BilayerState& s,
                                                            const BilayerParams& params,
                                                            const LevelGrid& levels);
StratifiedProfile bilayer_profile(const BilayerParams& params, const LevelGrid& levels);

/// Inverse of embed_bilayer on embedded data: weighted layer averages.
BilayerState layer_average(const StratifiedState& s, const BilayerParams& params,
                           const LevelGrid& levels);

enum class PycnoclineShape { Tanh, Erf, PiecewiseLinear };
std::string to_string(PycnoclineShape s);
PycnoclineShape pycnocline_shape_from_string(const std::string& s);

struct PycnoclineSpec {
  BilayerParams params;
  double epsilon = 0.01;
  PycnoclineShape shape = PycnoclineShape::Tanh;
};

struct SmoothedProfile {
  StratifiedProfile profile;
  /// Continuum ||rho_eps - rho_bl||_{L^1_r}, in closed form.
  double rho_l1 = 0.0;
  /// Continuum ||ubar_eps - ubar_bl||_{L^1_r}.
  double ubar_l1 = 0.0;
  /// Same distances from the sampled profiles: sum_i w_i |difference at r_i|.
  double rho_l1_sampled = 0.0;
  double ubar_l1_sampled = 0.0;
  double delta0() const noexcept { return rho_l1 + ubar_l1; }
};

/// Requires 0 < epsilon < min(Hbar_s, Hbar_b) / 2.
SmoothedProfile smooth_pycnocline(const PycnoclineSpec& spec, const LevelGrid& levels);

struct LipschitzCheck {
  double max_ratio = 0.0;
  double max_lhs = 0.0;
  /// The bound constant used: max over both profiles of max(||rho||_inf, ||1/rho||_inf).
  double M = 0.0;
  std::vector<double> level_ratio;
};

/// Pointwise |((1/rho1)M[rho1]h - (1/rho2)M[rho2]h)(x, r_i)| against
/// (M^3 |rho1 - rho2|(r_i) + M ||rho1 - rho2||_{L^1_r}) ||h(x, .)||_{L^inf_r}.
/// Points where both sides vanish count as ratio 0.
LipschitzCheck montgomery_lipschitz_check(const StratifiedProfile& rho1,
                                          const StratifiedProfile& rho2, const Field2D& h);

StratifiedProfile read_profile_csv(const std::string& path, const LevelGrid& levels);
void write_profile_csv(const std::string& path, const StratifiedProfile& profile);
StratifiedState read_stratified_csv(const std::string& path, const SpatialGrid& grid,
                                    const LevelGrid& levels);
void write_stratified_csv(const std::string& path, const SpatialGrid& grid,
                          const LevelGrid& levels, const StratifiedState& s);

}  // namespace stratlab
