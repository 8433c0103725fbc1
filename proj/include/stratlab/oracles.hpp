#pragma once

#include <array>
#include <complex>
#include <vector>

#include "stratlab/bilayer.hpp"
#include "stratlab/hyperbolicity.hpp"
#include "stratlab/stratified.hpp"

// Reference computations that share no numerical route with the library
// proper. Used by the test suites and by check-all.
namespace stratlab::oracles {

/// Number of distinct real roots of a quartic from a Sturm sequence.
int sturm_real_root_count(const Quartic& q);

/// Real eigenvalue count of A(U) from a general eigensolver applied to the
/// system matrix itself, with tolerance 1e-9 (1 + max |lambda|).
int matrix_real_root_count(const StatePoint& p);

/// Ferrari's closed-form roots.
std::array<std::complex<double>, 4> ferrari_roots(const Quartic& q);

/// Coefficients of det(lambda I - A(U)) by cofactor expansion with
/// polynomial entries.
Quartic determinant_polynomial(const StatePoint& p);

/// Fr_- as the tangency of p_b = m p_s + c with the inner oval and Fr_+ as the
/// tangency with the outer branch, both by direct minimisation over the curve.
CriticalFroude tangency_froude(double h_ratio, double rho_ratio);

/// Exact solution of the two-layer system linearised about the rest state of
/// `params` (kappa ignored), mode by mode from the eigendecomposition of
/// A(U_bar). Uses a plain O(n^2) DFT.
BilayerState linear_bilayer_solution(const SpatialGrid& grid, const BilayerParams& params,
                                     const BilayerState& initial, double t);

/// Amplitude factor exp(-kappa k^2 t) of a heat-equation mode.
double heat_decay(double kappa, double wavenumber, double t);

/// The Montgomery potential by literal double sums over cells, then
/// divided by rho when requested.
Field2D montgomery_naive(const StratifiedProfile& profile, const Field2D& h, bool divide_by_rho);

}  // namespace stratlab::oracles
