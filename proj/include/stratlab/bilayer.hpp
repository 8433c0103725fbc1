#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stratlab/core/grid.hpp"
#include "stratlab/core/spectral.hpp"
#include "stratlab/hyperbolicity.hpp"

namespace stratlab {

struct BilayerParams {
  double rho_s = 0.5;
  double rho_b = 1.0;
  double Hbar_s = 0.5;
  double Hbar_b = 0.5;
  double Ubar_s = 0.0;
  double Ubar_b = 0.0;
  double kappa = 0.0;

  double rho_ratio() const noexcept { return rho_s / rho_b; }

  /// Positive densities and reference depths, finite velocities, kappa in [0,1].
  void check_physical() const;
  /// check_physical() plus the normalisation Hbar_s + Hbar_b = 1 and
  /// Ubar_s + Ubar_b = 0 (both to 1e-14).
  void validate() const;
};

/// Deviations from the reference constants; rates use the same layout.
struct BilayerState {
  double t = 0.0;
  Field1D H_s, H_b, U_s, U_b;

  static BilayerState zero(std::size_t n);
  std::size_t size() const noexcept { return H_s.size(); }
  std::array<const Field1D*, 4> fields() const { return {&H_s, &H_b, &U_s, &U_b}; }
  std::array<Field1D*, 4> fields() { return {&H_s, &H_b, &U_s, &U_b}; }
};

/// Pointwise state of the full system at grid point j.
StatePoint state_point(const BilayerParams& p, const BilayerState& s, std::size_t j);

/// Fourier pseudo-spectral discretisation of the two-layer system with
/// thickness diffusivity. Every nonlinear product is formed on the grid and
/// the resulting rates are truncated by the 2/3 rule.
///
/// Holds FFT plans and scratch space; use one instance per thread.
class BilayerSolver {
 public:
  BilayerSolver(const SpatialGrid& grid, const BilayerParams& params);
  ~BilayerSolver();
  BilayerSolver(BilayerSolver&&) noexcept;
  BilayerSolver& operator=(BilayerSolver&&) noexcept;

  const SpatialGrid& grid() const noexcept { return grid_; }
  const BilayerParams& params() const noexcept { return params_; }

  /// Flat layout [H_s | H_b | U_s | U_b]. Throws DomainError if a depth is
  /// not positive.
  void rhs(std::span<const double> y, std::span<double> dydt);
  /// Non-stiff part only: the same rates without kappa d_xx H.
  void rhs_transport(std::span<const double> y, std::span<double> dydt);
  BilayerState rhs(const BilayerState& s);

  /// One RK4 step. In integrating-factor mode the thickness diffusion is
  /// integrated exactly in Fourier space.
  void step(std::span<double> y, double dt, bool integrating_factor = false);

  /// max over the grid of the fastest characteristic speed plus the bolus
  /// correction.
  double max_speed(std::span<const double> y);
  /// cfl * min(dx / max_speed, dx^2 / (2 kappa)).
  double stable_dt(std::span<const double> y, double cfl);

  SpectralOps& spectral() noexcept { return ops_; }

 private:
  void evaluate(std::span<const double> y, std::span<double> dydt, bool with_diffusion);

  SpatialGrid grid_;
  BilayerParams params_;
  SpectralOps ops_;
  struct Work;
  std::unique_ptr<Work> work_;
};

std::vector<double> flatten(const BilayerState& s);
BilayerState unflatten(std::span<const double> y, double t);

/// Rates of the non-diffusive system; params.kappa must be 0.
BilayerState rhs_nondiffusive(const SpatialGrid& grid, const BilayerState& s,
                              const BilayerParams& params);
/// Rates of the diffusive system; params.kappa must be positive.
BilayerState rhs_diffusive(const SpatialGrid& grid, const BilayerState& s,
                           const BilayerParams& params);

/// V_l = U_l - kappa d_x H_l / (Hbar_l + H_l).
std::pair<Field1D, Field1D> total_velocity(const SpatialGrid& grid, const BilayerState& s,
                                           const BilayerParams& params);

/// One RK4 step; rejects dt above the stability limit at CFL 0.4 (with 1e-12 slack).
BilayerState step(const SpatialGrid& grid, const BilayerState& s, const BilayerParams& params,
                  double dt);

enum class RunStatus { Completed, BlowUp, DepthFloor, NonFinite };
std::string to_string(RunStatus s);

struct IntegrateOptions {
  /// Fixed step; 0 selects cfl * min(dx/lambda_max, dx^2/(2 kappa)) from the
  /// initial state, shortened so that T is a whole number of steps.
  double dt = 0.0;
  double cfl = 0.4;
  /// Number of sampling intervals over [0, T]; 0 samples every step.
  std::size_t samples = 10;
  /// If positive: the initial state must lie in p^sigma pointwise, and leaving
  /// p^{sigma/2} at a sample is recorded as a warning.
  double sigma = 0.0;
  double sobolev_s = 2.0;
  /// Halt when the H^s norm exceeds this multiple of its initial value.
  double blowup_factor = 1e3;
  double depth_floor = 1e-6;
  bool keep_trajectory = true;
  bool integrating_factor = false;
};

struct BilayerDiagnostic {
  double t = 0.0;
  double mass_s = 0.0;
  double mass_b = 0.0;
  double mom_s = 0.0;
  double mom_b = 0.0;
  double hs_norm = 0.0;
  double min_depth = 0.0;
  /// min over the grid of Fr_- - shear; NaN when sigma monitoring is off.
  double margin = 0.0;
};

struct BilayerRun {
  std::vector<BilayerState> trajectory;
  std::vector<BilayerDiagnostic> diagnostics;
  BilayerState final_state;
  RunStatus status = RunStatus::Completed;
  double halt_time = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
  std::vector<std::string> warnings;
};

BilayerRun integrate(const SpatialGrid& grid, const BilayerState& initial,
                     const BilayerParams& params, double T, const IntegrateOptions& options = {});

/// min over the grid of Fr_- - shear.
double hyperbolic_margin(const BilayerParams& params, const BilayerState& s);

/// True if every grid point lies in p^sigma.
bool state_in_hyperbolic_set(const BilayerParams& params, const BilayerState& s, double sigma);

// ---------------------------------------------------------------------------
// Total-velocity reformulation.

struct BdResidual {
  double t = 0.0;
  /// Discrete L^2 norms of the residuals of the four (H, V) equations.
  std::array<double, 4> per_field{};
  double l2 = 0.0;
};

/// Substitutes (H, V) from five consecutive equally spaced states
/// (spacing dt) into the total-velocity system at the middle time. Time
/// derivatives use the fourth-order centred stencil; residuals are measured
/// at resolved scales (after 2/3 truncation).
BdResidual bd_residual(const SpatialGrid& grid, const BilayerParams& params,
                       std::span<const BilayerState> window, double dt);

// ---------------------------------------------------------------------------
// Symmetrizer energy.

struct EnergySample {
  double t = 0.0;
  double E = 0.0;
  /// sqrt(||dU||^2 + ||dV||^2)
  double l2 = 0.0;
  /// min over the grid of the smallest eigenvalue of S^lambda(U).
  double c2 = 0.0;
};

/// E = (S^lambda(U) dU, dU) + (S^lambda(U) dV, dV) by grid quadrature, with
/// S assembled at the full state of `base`. Each pair is ordered
/// (H_s, H_b, U_s, U_b).
EnergySample energy_functional(const SpatialGrid& grid, const BilayerParams& params,
                               const BilayerState& base, const BilayerState& dU,
                               const BilayerState& dV);

// ---------------------------------------------------------------------------
// Initial data and I/O.

enum class Profile { Zero, Sine, Gaussian };

struct LayerData {
  Profile shape = Profile::Zero;
  double amplitude = 0.0;
  /// Sine: integer wavenumber on the torus. Gaussian: inverse width.
  double wavenumber = 1.0;
  double phase = 0.0;
};

/// Closed-form initial data, truncated to the retained band.
BilayerState make_bilayer_state(const SpatialGrid& grid, const std::array<LayerData, 4>& data);

/// CSV with columns x,H_s,H_b,U_s,U_b.
BilayerState read_bilayer_csv(const std::string& path, const SpatialGrid& grid);
void write_bilayer_trajectory_csv(const std::string& path, const SpatialGrid& grid,
                                  std::span<const BilayerState> states);
void write_bilayer_diagnostics_csv(const std::string& path,
                                   std::span<const BilayerDiagnostic> diags);

}  // namespace stratlab
